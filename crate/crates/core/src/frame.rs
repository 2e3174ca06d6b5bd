//! Pauli-frame simulation of noisy Clifford programs.
//!
//! Frames are tracked for 64 shots at once, one `u64` lane word per qubit.
//! Ideal `X`/`Z` gates are folded into the frame, so the recorded bits are the
//! actual outcomes provided the Pauli-free program measures all zeros, which
//! holds for every memory experiment built by [`crate::circuit`].
//!
//! Shots are sampled in blocks of 64. Block `b` draws from ChaCha8 seeded with
//! `seed` on stream `b`, so shot `i` depends only on `(seed, i)`.

use crate::bits::BitVec;
use crate::circuit::{CircuitProgram, Instruction};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt::Write as _;

const LANES: usize = 64;

/// Accumulated error frame of a single shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    pub x_mask: BitVec,
    pub z_mask: BitVec,
}

impl PauliFrame {
    pub fn to_pauli_string(&self) -> PauliString {
        PauliString::from_masks(self.x_mask.clone(), self.z_mask.clone())
            .expect("frame masks share a length")
    }
}

/// Measurement outcomes of one shot in record order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShotRecord {
    pub bits: BitVec,
}

/// Frame state of 64 shots.
struct LaneFrame {
    x: Vec<u64>,
    z: Vec<u64>,
    record: Vec<u64>,
}

impl LaneFrame {
    fn new(qubits: usize) -> Self {
        Self {
            x: vec![0; qubits],
            z: vec![0; qubits],
            record: Vec::new(),
        }
    }

    #[inline]
    fn apply_pauli(&mut self, q: usize, p: Pauli, lanes: u64) {
        if p.x_bit() {
            self.x[q] ^= lanes;
        }
        if p.z_bit() {
            self.z[q] ^= lanes;
        }
    }

    /// Conjugates the frame by an ideal instruction. Noise and `TICK` are ignored;
    /// Pauli gates only act when `fold_paulis`.
    #[inline]
    fn apply(&mut self, ins: &Instruction, fold_paulis: bool) {
        match *ins {
            Instruction::H(q) => std::mem::swap(&mut self.x[q], &mut self.z[q]),
            Instruction::Cnot(c, t) => {
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Instruction::Cz(a, b) => {
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
            Instruction::X(q) if fold_paulis => self.x[q] ^= u64::MAX,
            Instruction::Z(q) if fold_paulis => self.z[q] ^= u64::MAX,
            Instruction::Reset(q) => {
                self.x[q] = 0;
                self.z[q] = 0;
            }
            Instruction::Measure(q) => self.record.push(self.x[q]),
            _ => {}
        }
    }
}

/// Lanes in which a Bernoulli(`p`) event fires. Sparse rates use geometric gaps.
fn fire_mask(rng: &mut ChaCha8Rng, p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 0.25 {
        let mut m = 0;
        for lane in 0..LANES {
            if rng.gen::<f64>() < p {
                m |= 1 << lane;
            }
        }
        return m;
    }
    let log_q = (1.0 - p).ln();
    let mut m = 0u64;
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.gen();
        let gap = ((1.0 - u).ln() / log_q).floor();
        if gap >= (LANES - pos) as f64 {
            return m;
        }
        pos += gap as usize;
        m |= 1 << pos;
        pos += 1;
        if pos >= LANES {
            return m;
        }
    }
}

fn two_qubit_paulis() -> [(Pauli, Pauli); 15] {
    let mut out = [(Pauli::I, Pauli::I); 15];
    for (slot, p) in out.iter_mut().zip(Pauli::two_qubit_non_identity()) {
        *slot = p;
    }
    out
}

fn sample_block(circ: &CircuitProgram, seed: u64, block: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let pairs = two_qubit_paulis();
    let mut frame = LaneFrame::new(circ.qubit_count());
    frame.record.reserve(circ.num_measurements());
    for ins in circ.instructions() {
        match *ins {
            Instruction::Depol1(p, q) => {
                let mut m = fire_mask(&mut rng, p);
                while m != 0 {
                    let lane = m & m.wrapping_neg();
                    m ^= lane;
                    let pauli = Pauli::NON_IDENTITY[rng.gen_range(0..3)];
                    frame.apply_pauli(q, pauli, lane);
                }
            }
            Instruction::Depol2(p, a, b) => {
                let mut m = fire_mask(&mut rng, p);
                while m != 0 {
                    let lane = m & m.wrapping_neg();
                    m ^= lane;
                    let (pa, pb) = pairs[rng.gen_range(0..15)];
                    frame.apply_pauli(a, pa, lane);
                    frame.apply_pauli(b, pb, lane);
                }
            }
            Instruction::XErr(p, q) => {
                let m = fire_mask(&mut rng, p);
                frame.x[q] ^= m;
            }
            _ => frame.apply(ins, true),
        }
    }
    frame.record
}

/// Samples `shots` measurement records from a noisy program.
pub fn sample(circ: &CircuitProgram, shots: usize, seed: u64) -> Vec<ShotRecord> {
    let m = circ.num_measurements();
    let blocks = shots.div_ceil(LANES);
    let words: Vec<Vec<u64>> = (0..blocks as u64)
        .into_par_iter()
        .map(|b| sample_block(circ, seed, b))
        .collect();
    let mut out = Vec::with_capacity(shots);
    for (b, record) in words.iter().enumerate() {
        let in_block = (shots - b * LANES).min(LANES);
        for lane in 0..in_block {
            let bits = BitVec::from_indices(
                m,
                record
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| (*w >> lane) & 1 == 1)
                    .map(|(i, _)| i),
            );
            out.push(ShotRecord { bits });
        }
    }
    out
}

/// A Pauli error applied just before instruction `position` executes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultInjection {
    pub position: usize,
    pub paulis: Vec<(usize, Pauli)>,
}

impl FaultInjection {
    pub fn from_pauli_string(position: usize, p: &PauliString) -> Self {
        Self {
            position,
            paulis: p.support().into_iter().map(|q| (q, p.get(q))).collect(),
        }
    }
}

/// Measurement records flipped by each injection when propagated through the
/// ideal part of `circ`. Injections are processed 64 at a time.
pub fn trace_batch(circ: &CircuitProgram, injections: &[FaultInjection]) -> Result<Vec<BitVec>> {
    let len = circ.len();
    let n = circ.qubit_count();
    for inj in injections {
        if inj.position > len {
            return Err(Error::Contract(format!(
                "injection position {} beyond program length {len}",
                inj.position
            )));
        }
        if let Some(&(q, _)) = inj.paulis.iter().find(|(q, _)| *q >= n) {
            return Err(Error::Contract(format!("injection on qubit {q} outside 0..{n}")));
        }
    }
    let mut order: Vec<usize> = (0..injections.len()).collect();
    order.sort_by_key(|&i| (injections[i].position, i));
    // measurements preceding each position
    let mut meas_before = Vec::with_capacity(len + 1);
    let mut count = 0;
    for ins in circ.instructions() {
        meas_before.push(count);
        if matches!(ins, Instruction::Measure(_)) {
            count += 1;
        }
    }
    meas_before.push(count);

    let m = circ.num_measurements();
    let mut out = vec![BitVec::zeros(m); injections.len()];
    for chunk in order.chunks(LANES) {
        let start = injections[chunk[0]].position;
        let mut frame = LaneFrame::new(n);
        frame.record = vec![0; meas_before[start]];
        let mut next = 0;
        for pos in start..=len {
            while next < chunk.len() && injections[chunk[next]].position == pos {
                for &(q, p) in &injections[chunk[next]].paulis {
                    frame.apply_pauli(q, p, 1 << next);
                }
                next += 1;
            }
            if let Some(ins) = circ.instructions().get(pos) {
                frame.apply(ins, false);
            }
        }
        for (lane, &idx) in chunk.iter().enumerate() {
            out[idx] = BitVec::from_indices(
                m,
                frame
                    .record
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| (*w >> lane) & 1 == 1)
                    .map(|(i, _)| i),
            );
        }
    }
    Ok(out)
}

/// Measurement records flipped by `error` inserted before instruction `position`.
pub fn trace_error(
    circ: &CircuitProgram,
    position: usize,
    error: &PauliString,
) -> Result<BTreeSet<usize>> {
    if error.num_qubits() != circ.qubit_count() {
        return Err(Error::Contract(format!(
            "error acts on {} qubits, program has {}",
            error.num_qubits(),
            circ.qubit_count()
        )));
    }
    let inj = FaultInjection::from_pauli_string(position, error);
    let flips = trace_batch(circ, std::slice::from_ref(&inj))?;
    Ok(flips[0].iter_ones().collect())
}

/// Frame left on the qubits after propagating `error` from `position` to `until`.
pub fn propagate_frame(
    circ: &CircuitProgram,
    position: usize,
    until: usize,
    error: &PauliString,
) -> Result<PauliFrame> {
    let len = circ.len();
    if position > until || until > len {
        return Err(Error::Contract(format!(
            "bad propagation window {position}..{until} for length {len}"
        )));
    }
    let n = circ.qubit_count();
    let mut frame = LaneFrame::new(n);
    for q in error.support() {
        frame.apply_pauli(q, error.get(q), 1);
    }
    for ins in &circ.instructions()[position..until] {
        frame.apply(ins, false);
    }
    Ok(PauliFrame {
        x_mask: BitVec::from_indices(n, (0..n).filter(|&q| frame.x[q] & 1 == 1)),
        z_mask: BitVec::from_indices(n, (0..n).filter(|&q| frame.z[q] & 1 == 1)),
    })
}

/// Shot file: `shots=<n> bits=<m>` then one hex row per shot.
pub fn write_shots(records: &[ShotRecord], bits: usize) -> String {
    let mut s = String::new();
    writeln!(s, "shots={} bits={bits}", records.len()).unwrap();
    for r in records {
        s.push_str(&r.bits.to_hex());
        s.push('\n');
    }
    s
}

pub fn read_shots(text: &str) -> Result<(usize, Vec<ShotRecord>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(1, "missing shot header"))?;
    let mut shots = None;
    let mut bits = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("shots", v)) => shots = v.parse::<usize>().ok(),
            Some(("bits", v)) => bits = v.parse::<usize>().ok(),
            _ => return Err(Error::format(1, format!("unexpected header field `{field}`"))),
        }
    }
    let (Some(shots), Some(bits)) = (shots, bits) else {
        return Err(Error::format(1, "header must be `shots=<n> bits=<m>`"));
    };
    let mut records = Vec::with_capacity(shots);
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bits = BitVec::from_hex(line, bits)
            .ok_or_else(|| Error::format(i + 2, "malformed hex row"))?;
        records.push(ShotRecord { bits });
    }
    if records.len() != shots {
        return Err(Error::format(
            records.len() + 1,
            format!("header promises {shots} shots, found {}", records.len()),
        ));
    }
    Ok((bits, records))
}
