//! Syndrome bits and defects from raw measurement records.
//!
//! Coordinates are zero-based internally: `t ∈ 0..=R`, `s ∈ 0..n_synd`, where
//! syndrome `s` compares data qubits `s` and `s + 1`. The CSV form reports
//! `s` one-based.

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::frame::ShotRecord;
use crate::layout::{CodeLayout, LogicalState};
use std::fmt::Write as _;

/// Where the bits of a memory experiment live in its measurement record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordShape {
    pub distance: usize,
    pub flags: usize,
    pub rounds: usize,
}

impl RecordShape {
    pub fn new(layout: &CodeLayout, rounds: usize) -> Self {
        Self {
            distance: layout.distance(),
            flags: layout.flags(),
            rounds,
        }
    }

    pub fn n_synd(&self) -> usize {
        self.distance - 1
    }

    pub fn patch_size(&self) -> usize {
        2 * self.flags + 1
    }

    /// Ancilla measurements per round.
    pub fn per_round(&self) -> usize {
        self.n_synd() * self.patch_size()
    }

    pub fn num_measurements(&self) -> usize {
        self.rounds * self.per_round() + self.distance
    }

    /// Syndrome rows, `R + 1`.
    pub fn syndrome_rounds(&self) -> usize {
        self.rounds + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.syndrome_rounds() * self.n_synd()
    }

    /// Record positions of the patch of syndrome `s` in round `round` (one-based).
    pub fn patch_positions(&self, round: usize, s: usize) -> std::ops::Range<usize> {
        let start = (round - 1) * self.per_round() + s * self.patch_size();
        start..start + self.patch_size()
    }

    pub fn data_position(&self, i: usize) -> usize {
        self.rounds * self.per_round() + i
    }
}

/// Syndrome bits `bits[t][s]`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeArray {
    rounds: usize,
    n_synd: usize,
    bits: BitVec,
}

impl SyndromeArray {
    pub fn zeros(rounds: usize, n_synd: usize) -> Self {
        Self {
            rounds,
            n_synd,
            bits: BitVec::zeros((rounds + 1) * n_synd),
        }
    }

    pub fn from_bits(rounds: usize, n_synd: usize, bits: BitVec) -> Result<Self> {
        if bits.len() != (rounds + 1) * n_synd {
            return Err(Error::Contract(format!(
                "{} syndrome bits do not fill a {}x{n_synd} array",
                bits.len(),
                rounds + 1
            )));
        }
        Ok(Self { rounds, n_synd, bits })
    }

    /// Number of syndrome rows (`R + 1`).
    pub fn num_rows(&self) -> usize {
        self.rounds + 1
    }

    pub fn n_synd(&self) -> usize {
        self.n_synd
    }

    pub fn get(&self, t: usize, s: usize) -> bool {
        self.bits.get(t * self.n_synd + s)
    }

    pub fn set(&mut self, t: usize, s: usize, v: bool) {
        self.bits.set(t * self.n_synd + s, v);
    }

    /// Flat bits in space-time order, index `t·n_synd + s`.
    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn defect_count(&self) -> usize {
        self.bits.count_ones()
    }
}

/// Coordinates `(t, s)` of set syndrome bits, in space-time order.
pub type DefectSet = Vec<(usize, usize)>;

pub fn defects(arr: &SyndromeArray) -> DefectSet {
    arr.bits
        .iter_ones()
        .map(|i| (i / arr.n_synd, i % arr.n_synd))
        .collect()
}

/// Syndrome flips caused by flipping measurement bits `flips`; the linear part
/// of [`compute_syndromes`].
pub fn syndrome_flips(shape: &RecordShape, flips: &BitVec) -> BitVec {
    let n = shape.n_synd();
    let r = shape.rounds;
    let mut out = BitVec::zeros(shape.num_nodes());
    let patch = |round: usize, s: usize| {
        shape
            .patch_positions(round, s)
            .fold(false, |acc, i| acc ^ flips.get(i))
    };
    for s in 0..n {
        let mut prev = patch(1, s);
        out.set(s, prev);
        for t in 1..r {
            let next = patch(t + 1, s);
            out.set(t * n + s, prev ^ next);
            prev = next;
        }
        let data = flips.get(shape.data_position(s)) ^ flips.get(shape.data_position(s + 1));
        out.set(r * n + s, prev ^ data);
    }
    out
}

pub fn compute_syndromes(
    shot: &ShotRecord,
    layout: &CodeLayout,
    rounds: usize,
    state: LogicalState,
) -> Result<SyndromeArray> {
    let shape = RecordShape::new(layout, rounds);
    if shot.bits.len() != shape.num_measurements() {
        return Err(Error::Contract(format!(
            "shot has {} bits, experiment with {rounds} rounds needs {}",
            shot.bits.len(),
            shape.num_measurements()
        )));
    }
    let mut bits = syndrome_flips(&shape, &shot.bits);
    let init = BitVec::from_bools(&vec![state.codeword_bit(); shape.distance]);
    for s in 0..shape.n_synd() {
        if init.get(s) ^ init.get(s + 1) {
            bits.toggle(s);
        }
    }
    SyndromeArray::from_bits(rounds, shape.n_synd(), bits)
}

/// Final data-qubit outcomes of a shot.
pub fn measured_data(shot: &ShotRecord, shape: &RecordShape) -> BitVec {
    BitVec::from_indices(
        shape.distance,
        (0..shape.distance).filter(|&i| shot.bits.get(shape.data_position(i))),
    )
}

pub fn syndrome_csv_header(rounds: usize, n_synd: usize) -> String {
    let mut h = String::from("shot");
    for t in 0..=rounds {
        for s in 1..=n_synd {
            write!(h, ",t{t}_s{s}").unwrap();
        }
    }
    h
}

pub fn write_syndrome_csv(arrays: &[SyndromeArray]) -> String {
    let mut out = String::new();
    let Some(first) = arrays.first() else {
        return out;
    };
    out.push_str(&syndrome_csv_header(first.rounds, first.n_synd));
    out.push('\n');
    for (i, a) in arrays.iter().enumerate() {
        write!(out, "{i}").unwrap();
        for b in a.bits.iter() {
            out.push_str(if b { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

pub fn read_syndrome_csv(text: &str) -> Result<Vec<SyndromeArray>> {
    let mut lines = text.lines();
    let Some(header) = lines.next() else {
        return Ok(Vec::new());
    };
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"shot") {
        return Err(Error::format(1, "syndrome header must start with `shot`"));
    }
    let mut rounds = 0;
    let mut n_synd = 0;
    for c in &cols[1..] {
        let parsed = c
            .strip_prefix('t')
            .and_then(|c| c.split_once("_s"))
            .and_then(|(t, s)| Some((t.parse::<usize>().ok()?, s.parse::<usize>().ok()?)));
        let Some((t, s)) = parsed else {
            return Err(Error::format(1, format!("bad syndrome column `{c}`")));
        };
        rounds = rounds.max(t);
        n_synd = n_synd.max(s);
    }
    if (rounds + 1) * n_synd != cols.len() - 1 {
        return Err(Error::format(1, "syndrome columns do not form a full array"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::format(i + 2, "wrong number of fields"));
        }
        let mut bits = BitVec::zeros(cols.len() - 1);
        for (k, f) in fields[1..].iter().enumerate() {
            match *f {
                "0" => {}
                "1" => bits.set(k, true),
                other => return Err(Error::format(i + 2, format!("bit `{other}` is not 0 or 1"))),
            }
        }
        out.push(SyndromeArray::from_bits(rounds, n_synd, bits)?);
    }
    Ok(out)
}
