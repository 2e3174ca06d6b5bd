mod common;

use common::statevector::{flipped, reference};
use flagrep_core::circuit::{build_memory_experiment, CircuitProgram, Instruction};
use flagrep_core::frame::{propagate_frame, trace_batch, trace_error, FaultInjection};
use flagrep_core::layout::{build_layout, Basis, CodeLayout, LogicalState, Side};
use flagrep_core::pauli::{Pauli, PauliString};
use std::collections::BTreeSet;

fn circuit(d: usize, f: usize, state: LogicalState, rounds: usize) -> (CodeLayout, CircuitProgram) {
    let l = build_layout(d, f, state.basis()).unwrap();
    let c = build_memory_experiment(&l, rounds, state).unwrap();
    (l, c)
}

/// Every single-qubit Pauli at every position, checked against dense simulation.
fn check_against_statevector(f: usize, state: LogicalState) {
    let (_, circ) = circuit(3, f, state, 2);
    let r = reference(&circ);
    let n = circ.qubit_count();
    let mut injections = Vec::new();
    for pos in 0..=circ.len() {
        for q in 0..n {
            for p in Pauli::NON_IDENTITY {
                injections.push(FaultInjection { position: pos, paulis: vec![(q, p)] });
            }
        }
    }
    let traced = trace_batch(&circ, &injections).unwrap();
    for (inj, t) in injections.iter().zip(&traced) {
        let want = flipped(&circ, &r, inj.position, &inj.paulis);
        let got: Vec<usize> = t.iter_ones().collect();
        assert_eq!(got, want, "f={f} {state} injection {inj:?}");
    }
}

#[test]
fn trace_matches_statevector_flagless() {
    for st in [LogicalState::Zero, LogicalState::Plus] {
        check_against_statevector(0, st);
    }
}

#[test]
fn trace_matches_statevector_single_flag() {
    for st in [LogicalState::Zero, LogicalState::Plus] {
        check_against_statevector(1, st);
    }
}

#[test]
fn trace_matches_statevector_double_flag() {
    for st in [LogicalState::Zero, LogicalState::Plus] {
        check_against_statevector(2, st);
    }
}

#[test]
fn noiseless_reference_reads_the_codeword() {
    for st in LogicalState::ALL {
        for f in 0..=2 {
            let (l, circ) = circuit(3, f, st, 2);
            let r = reference(&circ);
            let data = &r.outcomes[r.outcomes.len() - l.n_data()..];
            assert!(data.iter().all(|&b| b == st.codeword_bit()), "f={f} {st}");
            assert!(r.outcomes[..r.outcomes.len() - l.n_data()].iter().all(|&b| !b));
        }
    }
}

/// Instruction positions right after each reset of `qubit`, one per round.
fn init_positions(circ: &CircuitProgram, qubit: usize) -> Vec<usize> {
    circ.instructions()
        .iter()
        .enumerate()
        .filter(|(_, ins)| **ins == Instruction::Reset(qubit))
        .map(|(i, _)| i + 1)
        .collect()
}

fn single(n: usize, q: usize, p: Pauli) -> PauliString {
    PauliString::single(n, q, p)
}

#[test]
fn syndrome_init_error_flips_only_its_outcome() {
    let rounds = 3;
    for st in [LogicalState::Zero, LogicalState::Plus] {
        for f in 0..=2 {
            for d in [3, 5] {
                let (l, circ) = circuit(d, f, st, rounds);
                for s in 0..l.n_synd() {
                    let q = l.syndrome_qubit(s);
                    let inits = init_positions(&circ, q);
                    assert_eq!(inits.len(), rounds + 1);
                    for (r, &pos) in inits[..rounds].iter().enumerate() {
                        let got = trace_error(&circ, pos, &single(circ.qubit_count(), q, Pauli::X)).unwrap();
                        let own = circ.measurement_index(q, r).unwrap();
                        assert_eq!(got, BTreeSet::from([own]), "d={d} f={f} {st} s={s} round {r}");
                        let frame = propagate_frame(&circ, pos, circ.len(), &single(circ.qubit_count(), q, Pauli::X)).unwrap();
                        for dq in l.data_qubits() {
                            assert!(!frame.x_mask.get(dq) && !frame.z_mask.get(dq));
                        }
                    }
                }
            }
        }
    }
}

/// Index just past the first gate layer after `from` that contains `ins`.
fn after(circ: &CircuitProgram, from: usize, ins: Instruction) -> usize {
    from + circ.instructions()[from..].iter().position(|i| *i == ins).unwrap() + 1
}

#[test]
fn inner_flag_init_error_spread_is_undone_by_the_ladder() {
    for st in [LogicalState::Zero, LogicalState::Plus] {
        let (l, circ) = circuit(5, 2, st, 2);
        let n = circ.qubit_count();
        for s in 0..l.n_synd() {
            for side in [Side::Left, Side::Right] {
                let inner = l.flag_qubit(s, side, 1);
                let outer = l.flag_qubit(s, side, 2);
                let pos = init_positions(&circ, inner)[0];
                let err = single(n, inner, Pauli::X);
                let first = after(&circ, pos, Instruction::Cnot(inner, outer));
                let mid = propagate_frame(&circ, pos, first, &err).unwrap();
                assert!(mid.x_mask.get(outer), "ladder copies the error to the outer flag");
                let second = after(&circ, first, Instruction::Cnot(inner, outer));
                let end = propagate_frame(&circ, pos, second, &err).unwrap();
                assert!(!end.x_mask.get(outer) && !end.z_mask.get(outer));
                assert!(end.x_mask.get(inner));
                let syn = l.syndrome_qubit(s);
                assert!(!end.x_mask.get(syn) && !end.z_mask.get(syn));
                let got = trace_error(&circ, pos, &err).unwrap();
                assert_eq!(got, BTreeSet::from([circ.measurement_index(inner, 0).unwrap()]));
            }
        }
    }
}

#[test]
fn coupling_flag_init_error_leaves_only_an_invisible_data_error() {
    for st in [LogicalState::Zero, LogicalState::Plus] {
        for f in 1..=2 {
            let (l, circ) = circuit(5, f, st, 2);
            let n = circ.qubit_count();
            let invisible = match st.basis() {
                Basis::Z => Pauli::Z,
                Basis::X => Pauli::X,
            };
            for s in 0..l.n_synd() {
                for (side, dq) in [(Side::Left, l.data_qubit(s)), (Side::Right, l.data_qubit(s + 1))] {
                    let flag = l.flag_qubit(s, side, f);
                    let pos = init_positions(&circ, flag)[0];
                    let err = single(n, flag, Pauli::X);
                    let round_end = circ
                        .instructions()
                        .iter()
                        .position(|i| *i == Instruction::Measure(flag))
                        .unwrap();
                    let frame = propagate_frame(&circ, pos, round_end, &err).unwrap().to_pauli_string();
                    for q in l.data_qubits() {
                        let want = if q == dq { invisible } else { Pauli::I };
                        assert_eq!(frame.get(q), want, "f={f} {st} s={s} {side:?}");
                    }
                    let got = trace_error(&circ, pos, &err).unwrap();
                    assert_eq!(got, BTreeSet::from([circ.measurement_index(flag, 0).unwrap()]));
                }
            }
        }
    }
}
