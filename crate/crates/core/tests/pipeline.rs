use flagrep_core::analysis::defect_rate_per_round;
use flagrep_core::bits::BitVec;
use flagrep_core::chain::HeavyHexGraph;
use flagrep_core::circuit::{build_memory_experiment, CircuitProgram, Instruction};
use flagrep_core::decoder::{Category, Decoder};
use flagrep_core::experiment::{prepare, syndromes_of, RunSpec};
use flagrep_core::frame::{sample, trace_batch, FaultInjection, ShotRecord};
use flagrep_core::graph::{
    build_hardware_graph, build_sample_graph, combine, enumerate_mechanisms, EdgeKind, MatchingGraph,
    MAX_DECOMPOSITION,
};
use flagrep_core::layout::{build_layout, Basis, CodeLayout, LogicalState};
use flagrep_core::noise::{attach_noise, CalibrationModel, QubitCalibration};
use flagrep_core::pauli::Pauli;
use flagrep_core::syndrome::{compute_syndromes, defects, measured_data, syndrome_flips, RecordShape};
use proptest::prelude::*;

/// Syndromes straight from the definition, addressing outcomes by qubit.
fn oracle_syndromes(
    circ: &CircuitProgram,
    l: &CodeLayout,
    rounds: usize,
    state: LogicalState,
    bits: &BitVec,
) -> Vec<Vec<bool>> {
    let f = l.flags();
    let patch = |r: usize, s: usize| {
        let c = l.syndrome_qubit(s);
        (c - f..=c + f).fold(false, |acc, q| acc ^ bits.get(circ.measurement_index(q, r - 1).unwrap()))
    };
    let data = |i: usize| bits.get(circ.measurement_index(l.data_qubit(i), 0).unwrap());
    let init = state.codeword_bit();
    (0..=rounds)
        .map(|t| {
            (0..l.n_synd())
                .map(|s| match t {
                    0 => patch(1, s) ^ init ^ init,
                    t if t == rounds => patch(rounds, s) ^ data(s) ^ data(s + 1),
                    t => patch(t, s) ^ patch(t + 1, s),
                })
                .collect()
        })
        .collect()
}

fn as_rows(a: &flagrep_core::syndrome::SyndromeArray) -> Vec<Vec<bool>> {
    (0..a.num_rows()).map(|t| (0..a.n_synd()).map(|s| a.get(t, s)).collect()).collect()
}

fn kyoto(d: usize, f: usize, rounds: usize, state: LogicalState) -> (CodeLayout, CircuitProgram, MatchingGraph) {
    let spec = RunSpec { distance: d, flags: f, rounds, state, shots: 1, seed: 0 };
    let prep = prepare(&spec, &CalibrationModel::kyoto_avg()).unwrap();
    let g = build_hardware_graph(&prep.noisy, &prep.layout, rounds).unwrap();
    (prep.layout, prep.noisy, g)
}

fn noiseless_record(circ: &CircuitProgram) -> ShotRecord {
    sample(&circ.strip_noise(), 1, 0).pop().unwrap()
}

#[test]
fn noiseless_runs_are_clean_across_the_grid() {
    let rounds = 10;
    for d in [3, 5, 7, 9] {
        for f in 0..=2 {
            for basis in [Basis::Z, Basis::X] {
                let l = build_layout(d, f, basis).unwrap();
                let states = LogicalState::states_for(basis);
                let (_, _, g) = kyoto(d, f, rounds, states[0]);
                let dec = Decoder::new(&g);
                let shape = RecordShape::new(&l, rounds);
                for st in states {
                    let circ = build_memory_experiment(&l, rounds, st).unwrap();
                    for rec in sample(&circ, 5, 3) {
                        let a = compute_syndromes(&rec, &l, rounds, st).unwrap();
                        assert_eq!((a.num_rows(), a.n_synd()), (rounds + 1, d - 1));
                        assert!(defects(&a).is_empty(), "d={d} f={f} {st}");
                        let data = measured_data(&rec, &shape);
                        assert!(data.iter().all(|b| b == st.codeword_bit()));
                        let out = dec.decode(&[], &data, st).unwrap();
                        assert_eq!(out.category, Category::NonDetected);
                        assert!(!out.failure);
                    }
                }
            }
        }
    }
}

#[test]
fn single_measurement_flip_gives_a_time_pair() {
    let rounds = 5;
    for f in 0..=2 {
        for st in [LogicalState::Zero, LogicalState::Minus] {
            let l = build_layout(5, f, st.basis()).unwrap();
            let circ = build_memory_experiment(&l, rounds, st).unwrap();
            let base = noiseless_record(&circ);
            for s in 0..l.n_synd() {
                for r in 1..rounds {
                    let mut rec = base.clone();
                    rec.bits.toggle(circ.measurement_index(l.syndrome_qubit(s), r - 1).unwrap());
                    let a = compute_syndromes(&rec, &l, rounds, st).unwrap();
                    assert_eq!(defects(&a), vec![(r - 1, s), (r, s)], "f={f} s={s} r={r}");
                }
            }
        }
    }
}

fn random_bits(len: usize, seed: u64) -> BitVec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    BitVec::from_bools(&(0..len).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn syndromes_match_definition_and_are_linear(f in 0usize..=2, d in prop::sample::select(vec![3usize, 5, 7]), rounds in 1usize..=4, sa: u64, sb: u64, si in 0usize..4) {
        let st = LogicalState::ALL[si];
        let l = build_layout(d, f, st.basis()).unwrap();
        let circ = build_memory_experiment(&l, rounds, st).unwrap();
        let m = circ.num_measurements();
        let a = random_bits(m, sa);
        let b = random_bits(m, sb);
        let mut ab = a.clone();
        ab.xor_assign(&b);
        let syn = |bits: &BitVec| compute_syndromes(&ShotRecord { bits: bits.clone() }, &l, rounds, st).unwrap();
        prop_assert_eq!(as_rows(&syn(&a)), oracle_syndromes(&circ, &l, rounds, st, &a));
        let shape = RecordShape::new(&l, rounds);
        let mut lin = syndrome_flips(&shape, &a);
        lin.xor_assign(&syndrome_flips(&shape, &b));
        prop_assert_eq!(&syndrome_flips(&shape, &ab), &lin);
        let mut affine = syn(&a).bits().clone();
        affine.xor_assign(syn(&b).bits());
        affine.xor_assign(syn(&BitVec::zeros(m)).bits());
        let whole = syn(&ab);
        prop_assert_eq!(whole.bits(), &affine);
    }

    #[test]
    fn trace_is_linear(f in 0usize..=2, seed: u64, pos_frac in 0.0..1.0f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let l = build_layout(5, f, Basis::Z).unwrap();
        let circ = build_memory_experiment(&l, 3, LogicalState::Zero).unwrap();
        let n = circ.qubit_count();
        let pos = (pos_frac * circ.len() as f64) as usize;
        let mut draw = || -> Vec<(usize, Pauli)> {
            (0..n).map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])).collect()
        };
        let e1 = draw();
        let e2 = draw();
        let prod: Vec<(usize, Pauli)> = e1
            .iter()
            .zip(&e2)
            .map(|(&(q, a), &(_, b))| (q, Pauli::from_bits(a.x_bit() ^ b.x_bit(), a.z_bit() ^ b.z_bit())))
            .collect();
        let t = trace_batch(&circ, &[
            FaultInjection { position: pos, paulis: e1 },
            FaultInjection { position: pos, paulis: e2 },
            FaultInjection { position: pos, paulis: prod },
        ]).unwrap();
        let mut x = t[0].clone();
        x.xor_assign(&t[1]);
        prop_assert_eq!(&t[2], &x);
    }
}

#[test]
fn odd_footprints_come_only_from_boundary_mechanisms() {
    for f in 0..=2 {
        let (l, noisy, g) = kyoto(5, f, 4, LogicalState::Zero);
        let shape = RecordShape::new(&l, 4);
        let mut odd = 0;
        for (nodes, _) in enumerate_mechanisms(&noisy, &shape).unwrap() {
            let edges = g.decompose(&nodes, MAX_DECOMPOSITION).unwrap();
            let boundary = edges.iter().filter(|&&k| g.edges()[k].kind == EdgeKind::Boundary).count();
            assert_eq!(nodes.len() % 2, boundary % 2, "f={f} footprint {nodes:?}");
            if nodes.len() % 2 == 1 {
                odd += 1;
                // the lone defect sits in the first or last syndrome column
                assert!(nodes.iter().any(|&v| {
                    let s = g.coords(v).unwrap().1;
                    s == 0 || s == l.n_synd() - 1
                }));
            }
        }
        assert!(odd > 0);
    }
}

/// Indices of the two-qubit gates touching data qubit `i`.
fn couplings(circ: &CircuitProgram, q: usize) -> Vec<usize> {
    circ.instructions()
        .iter()
        .enumerate()
        .filter(|(_, ins)| matches!(ins, Instruction::Cnot(..) | Instruction::Cz(..)) && ins.qubits().contains(&q))
        .map(|(k, _)| k)
        .collect()
}

#[test]
fn mid_circuit_data_error_is_corrected() {
    let rounds = 4;
    for f in 0..=2 {
        for st in [LogicalState::Zero, LogicalState::Plus] {
            let (l, noisy, g) = kyoto(5, f, rounds, st);
            let ideal = build_memory_experiment(&l, rounds, st).unwrap();
            assert_eq!(noisy.strip_noise(), ideal);
            let dec = Decoder::new(&g);
            let shape = RecordShape::new(&l, rounds);
            let base = noiseless_record(&ideal);
            let err = l.basis().detected_error();
            for i in 1..l.n_data() - 1 {
                let q = l.data_qubit(i);
                let gates = couplings(&ideal, q);
                assert_eq!(gates.len(), 2 * rounds);
                // round 2: before both couplings, then between them
                let (first, second) = (gates[2], gates[3]);
                for (pos, diagonal) in [(first, false), (first + 1, true)] {
                    assert!(pos <= second);
                    let flips = trace_batch(&ideal, &[FaultInjection { position: pos, paulis: vec![(q, err)] }])
                        .unwrap()
                        .pop()
                        .unwrap();
                    let mut rec = base.clone();
                    rec.bits.xor_assign(&flips);
                    let a = compute_syndromes(&rec, &l, rounds, st).unwrap();
                    let def = defects(&a);
                    assert_eq!(def.len(), 2, "f={f} {st} i={i}");
                    let (dt, ds) = (def[0].0.abs_diff(def[1].0), def[0].1.abs_diff(def[1].1));
                    assert_eq!((dt, ds), if diagonal { (1, 1) } else { (0, 1) }, "f={f} {st} i={i}");
                    assert!(def.iter().all(|&(_, s)| s == i - 1 || s == i));
                    let data = measured_data(&rec, &shape);
                    assert_eq!(data.count_ones(), if st.codeword_bit() { l.n_data() - 1 } else { 1 });
                    let out = dec.decode(&def, &data, st).unwrap();
                    assert_eq!(out.category, Category::Corrected);
                    assert!(!out.failure);
                    assert!(out.corrected.iter().all(|b| b == st.codeword_bit()));
                }
            }
        }
    }
}

#[test]
fn half_the_code_flipped_is_not_corrected() {
    let rounds = 3;
    for d in [3, 5, 7, 9] {
        for st in [LogicalState::Zero, LogicalState::Minus] {
            let (l, _, g) = kyoto(d, 1, rounds, st);
            let ideal = build_memory_experiment(&l, rounds, st).unwrap();
            let shape = RecordShape::new(&l, rounds);
            let mut rec = noiseless_record(&ideal);
            for i in 0..d.div_ceil(2) {
                rec.bits.toggle(shape.data_position(i));
            }
            let a = compute_syndromes(&rec, &l, rounds, st).unwrap();
            let def = defects(&a);
            assert_eq!(def, vec![(rounds, d.div_ceil(2) - 1)]);
            let out = Decoder::new(&g).decode(&def, &measured_data(&rec, &shape), st).unwrap();
            assert!(out.failure, "d={d} {st}");
            assert_eq!(out.category, Category::NonCorrected);
        }
    }
}

#[test]
fn corrections_always_restore_a_codeword() {
    let calib = CalibrationModel::kyoto_avg().scaled(3.0).unwrap();
    for f in 0..=2 {
        let spec = RunSpec { distance: 7, flags: f, rounds: 6, state: LogicalState::One, shots: 2000, seed: 1 };
        let prep = prepare(&spec, &calib).unwrap();
        let g = build_hardware_graph(&prep.noisy, &prep.layout, 6).unwrap();
        let dec = Decoder::new(&g);
        let shape = RecordShape::new(&prep.layout, 6);
        let records = sample(&prep.noisy, spec.shots, 5);
        let arrays = syndromes_of(&records, &prep.layout, 6, spec.state).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for (r, a) in records.iter().zip(&arrays) {
            let out = dec.decode(&defects(a), &measured_data(r, &shape), spec.state).unwrap();
            let first = out.corrected.get(0);
            assert!(out.corrected.iter().all(|b| b == first));
            assert_eq!(out.failure, first != spec.state.codeword_bit());
            seen.insert(out.category);
        }
        assert!(seen.contains(&Category::Corrected));
    }
}

#[test]
fn readout_only_defect_rates_follow_incident_mechanisms() {
    let m = 0.02;
    let rounds = 6;
    let l = build_layout(5, 0, Basis::Z).unwrap();
    let n = l.total_qubits();
    let g = HeavyHexGraph::from_edges((0..n - 1).map(|i| (i, i + 1))).unwrap();
    let q = QubitCalibration { id: 0, sx_error: 0.0, x_error: 0.0, readout_error: m, reset_error: Some(0.0), idle_error: 0.0 };
    let calib = CalibrationModel::uniform(&g, &q, 0.0);
    let ideal = build_memory_experiment(&l, rounds, LogicalState::Zero).unwrap();
    let noisy = attach_noise(&ideal, &calib, &(0..n).collect::<Vec<_>>()).unwrap();
    let shots = 100_000;
    let arrays = syndromes_of(&sample(&noisy, shots, 21), &l, rounds, LogicalState::Zero).unwrap();
    let rates = defect_rate_per_round(&arrays).unwrap();
    for (s, curve) in rates.per_syndrome.iter().enumerate() {
        for (t, &r) in curve.iter().enumerate() {
            // readout of round t and t+1 ancillas, plus two data readouts at the end
            let want = match t {
                0 => m,
                t if t == rounds => combine(m, combine(m, m)),
                _ => combine(m, m),
            };
            let se = (want * (1.0 - want) / shots as f64).sqrt();
            assert!((r - want).abs() < 4.0 * se, "s={s} t={t}: {r} vs {want}");
        }
    }
}

#[test]
fn both_backends_share_the_topology() {
    let (l, noisy, hw) = kyoto(5, 2, 4, LogicalState::Plus);
    let arrays = syndromes_of(&sample(&noisy, 500, 2), &l, 4, LogicalState::Plus).unwrap();
    let sg = build_sample_graph(&arrays, &l, 4).unwrap();
    assert!(hw.same_topology(&sg.graph));
    for e in hw.edges() {
        assert!(e.p <= 0.5);
        match e.kind {
            EdgeKind::T => assert!(e.correction.is_empty()),
            EdgeKind::Boundary => {
                let s = e.a % l.n_synd();
                assert_eq!(e.correction, vec![if s == 0 { 0 } else { l.n_synd() }]);
            }
            _ => {
                let (sa, sb) = (e.a % l.n_synd(), e.b % l.n_synd());
                let c = e.correction[0];
                assert_eq!(e.correction.len(), 1);
                assert!((c == sa || c == sa + 1) && (c == sb || c == sb + 1));
            }
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    let (_, noisy, _) = kyoto(3, 1, 3, LogicalState::One);
    assert_eq!(sample(&noisy, 300, 7), sample(&noisy, 300, 7));
    assert_ne!(sample(&noisy, 300, 7), sample(&noisy, 300, 8));
    // shot i depends only on (seed, i)
    assert_eq!(sample(&noisy, 300, 7)[..100], sample(&noisy, 100, 7)[..]);
}
