//! Repetition-code layouts with zero, one or two flag qubits between each
//! data qubit and its neighbouring syndrome qubit.
//!
//! Qubits are indexed by their position along the 1-D chain:
//!
//! ```text
//! data0 - flag^f - synd0 - flag^f - data1 - flag^f - synd1 - ...
//! ```
//!
//! so data qubit `i` sits at `i·(2f+2)` and syndrome qubit `s` at `s·(2f+2)+f+1`.
//! Syndrome `s` checks data qubits `s` and `s+1`.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::Z => Pauli::Z,
            Basis::X => Pauli::X,
        }
    }

    /// The error type this basis' stabilizers detect.
    pub fn detected_error(self) -> Pauli {
        match self {
            Basis::Z => Pauli::X,
            Basis::X => Pauli::Z,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => write!(f, "Z"),
            Basis::X => write!(f, "X"),
        }
    }
}

/// Prepared logical state of a memory experiment.
///
/// `|+>_L` is the product state `|+>^d` over data qubits (likewise `|->_L`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicalState {
    #[serde(rename = "0_L")]
    Zero,
    #[serde(rename = "1_L")]
    One,
    #[serde(rename = "+_L")]
    Plus,
    #[serde(rename = "-_L")]
    Minus,
}

impl LogicalState {
    pub const ALL: [LogicalState; 4] = [
        LogicalState::Zero,
        LogicalState::One,
        LogicalState::Plus,
        LogicalState::Minus,
    ];

    pub fn basis(self) -> Basis {
        match self {
            LogicalState::Zero | LogicalState::One => Basis::Z,
            LogicalState::Plus | LogicalState::Minus => Basis::X,
        }
    }

    /// Value every data qubit reads out in the absence of errors.
    pub fn codeword_bit(self) -> bool {
        matches!(self, LogicalState::One | LogicalState::Minus)
    }

    /// Short file-system friendly tag.
    pub fn tag(self) -> &'static str {
        match self {
            LogicalState::Zero => "0L",
            LogicalState::One => "1L",
            LogicalState::Plus => "pL",
            LogicalState::Minus => "mL",
        }
    }

    pub fn states_for(basis: Basis) -> [LogicalState; 2] {
        match basis {
            Basis::Z => [LogicalState::Zero, LogicalState::One],
            Basis::X => [LogicalState::Plus, LogicalState::Minus],
        }
    }
}

impl fmt::Display for LogicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LogicalState::Zero => "0_L",
            LogicalState::One => "1_L",
            LogicalState::Plus => "+_L",
            LogicalState::Minus => "-_L",
        };
        write!(f, "{s}")
    }
}

impl FromStr for LogicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0_L" | "0L" | "0" | "zero" => Ok(LogicalState::Zero),
            "1_L" | "1L" | "1" | "one" => Ok(LogicalState::One),
            "+_L" | "pL" | "+" | "plus" => Ok(LogicalState::Plus),
            "-_L" | "mL" | "-" | "minus" => Ok(LogicalState::Minus),
            other => Err(Error::Parameter(format!("unknown logical state `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitRole {
    Data(usize),
    Syndrome(usize),
    /// `hop` counts flags away from the syndrome qubit, starting at 1.
    Flag { syndrome: usize, side: Side, hop: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeLayout {
    distance: usize,
    flags: usize,
    basis: Basis,
    roles: Vec<QubitRole>,
    stabilizers: Vec<PauliString>,
}

pub fn build_layout(distance: usize, flags: usize, basis: Basis) -> Result<CodeLayout> {
    if distance < 3 {
        return Err(Error::Parameter(format!(
            "distance must be at least 3, got {distance}"
        )));
    }
    if flags > 2 {
        return Err(Error::Parameter(format!(
            "flag count must be 0, 1 or 2, got {flags}"
        )));
    }
    let period = 2 * flags + 2;
    let total = (distance - 1) * period + 1;
    let mut roles = Vec::with_capacity(total);
    for pos in 0..total {
        let (cell, offset) = (pos / period, pos % period);
        let role = if offset == 0 {
            QubitRole::Data(cell)
        } else if offset == flags + 1 {
            QubitRole::Syndrome(cell)
        } else if offset <= flags {
            QubitRole::Flag {
                syndrome: cell,
                side: Side::Left,
                hop: flags + 1 - offset,
            }
        } else {
            QubitRole::Flag {
                syndrome: cell,
                side: Side::Right,
                hop: offset - flags - 1,
            }
        };
        roles.push(role);
    }
    let p = basis.pauli();
    let stabilizers = (0..distance - 1)
        .map(|s| PauliString::uniform(total, [s * period, (s + 1) * period], p))
        .collect();
    Ok(CodeLayout {
        distance,
        flags,
        basis,
        roles,
        stabilizers,
    })
}

impl CodeLayout {
    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn flags(&self) -> usize {
        self.flags
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn n_data(&self) -> usize {
        self.distance
    }

    pub fn n_synd(&self) -> usize {
        self.distance - 1
    }

    pub fn n_flag(&self) -> usize {
        2 * self.flags * (self.distance - 1)
    }

    pub fn total_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[QubitRole] {
        &self.roles
    }

    pub fn role(&self, qubit: usize) -> QubitRole {
        self.roles[qubit]
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    fn period(&self) -> usize {
        2 * self.flags + 2
    }

    pub fn data_qubit(&self, i: usize) -> usize {
        assert!(i < self.distance);
        i * self.period()
    }

    pub fn syndrome_qubit(&self, s: usize) -> usize {
        assert!(s < self.n_synd());
        s * self.period() + self.flags + 1
    }

    pub fn flag_qubit(&self, syndrome: usize, side: Side, hop: usize) -> usize {
        assert!(hop >= 1 && hop <= self.flags);
        let centre = self.syndrome_qubit(syndrome);
        match side {
            Side::Left => centre - hop,
            Side::Right => centre + hop,
        }
    }

    pub fn data_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.distance).map(|i| self.data_qubit(i))
    }

    /// Syndrome and flag qubits in chain order; the per-round measurement order.
    pub fn ancilla_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.total_qubits()).filter(|&q| !matches!(self.roles[q], QubitRole::Data(_)))
    }

    /// Number of measured ancillas attached to each syndrome qubit (the patch size).
    pub fn patch_size(&self) -> usize {
        2 * self.flags + 1
    }

    /// Chain positions of syndrome `s` and its flags, in chain order.
    pub fn patch(&self, s: usize) -> std::ops::RangeInclusive<usize> {
        let c = self.syndrome_qubit(s);
        c - self.flags..=c + self.flags
    }
}

pub fn logical_operator(layout: &CodeLayout) -> PauliString {
    PauliString::uniform(
        layout.total_qubits(),
        layout.data_qubits(),
        layout.basis().pauli(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::anticommutes;

    #[test]
    fn qubit_counts_match_closed_form() {
        for d in [3, 5, 7, 9] {
            for f in 0..=2 {
                let l = build_layout(d, f, Basis::Z).unwrap();
                assert_eq!(l.total_qubits(), d + (d - 1) + 2 * f * (d - 1));
                assert_eq!(l.n_data() + l.n_synd() + l.n_flag(), l.total_qubits());
                let flags = l
                    .roles()
                    .iter()
                    .filter(|r| matches!(r, QubitRole::Flag { .. }))
                    .count();
                assert_eq!(flags, l.n_flag());
            }
        }
        assert_eq!(build_layout(9, 2, Basis::Z).unwrap().total_qubits(), 49);
        assert_eq!(build_layout(9, 1, Basis::Z).unwrap().total_qubits(), 33);
    }

    #[test]
    fn distance_three_without_flags() {
        let l = build_layout(3, 0, Basis::Z).unwrap();
        assert_eq!(l.total_qubits(), 5);
        let expect: Vec<_> = [[0, 2], [2, 4]]
            .iter()
            .map(|qs| PauliString::uniform(5, qs.iter().copied(), Pauli::Z))
            .collect();
        assert_eq!(l.stabilizers(), expect.as_slice());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(build_layout(2, 0, Basis::Z), Err(Error::Parameter(_))));
        assert!(matches!(build_layout(5, 3, Basis::X), Err(Error::Parameter(_))));
    }

    #[test]
    fn flag_positions_sit_between_data_and_syndrome() {
        let l = build_layout(3, 2, Basis::Z).unwrap();
        // d0 f f s0 f f d1 f f s1 f f d2
        assert_eq!(l.flag_qubit(0, Side::Left, 2), 1);
        assert_eq!(l.flag_qubit(0, Side::Left, 1), 2);
        assert_eq!(l.syndrome_qubit(0), 3);
        assert_eq!(l.flag_qubit(0, Side::Right, 1), 4);
        assert_eq!(l.flag_qubit(0, Side::Right, 2), 5);
        assert_eq!(l.data_qubit(1), 6);
        assert_eq!(l.patch(1), 7..=11);
        assert_eq!(l.ancilla_qubits().count(), 10);
    }

    #[test]
    fn logical_operators() {
        let z = build_layout(3, 0, Basis::Z).unwrap();
        assert_eq!(
            logical_operator(&z),
            PauliString::uniform(5, [0, 2, 4], Pauli::Z)
        );
        let x = build_layout(3, 0, Basis::X).unwrap();
        assert_eq!(
            logical_operator(&x),
            PauliString::uniform(5, [0, 2, 4], Pauli::X)
        );
    }

    #[test]
    fn logical_commutes_with_stabilizers() {
        for basis in [Basis::Z, Basis::X] {
            for f in 0..=2 {
                let l = build_layout(7, f, basis).unwrap();
                let lo = logical_operator(&l);
                for s in l.stabilizers() {
                    assert!(!anticommutes(s, &lo).unwrap());
                }
            }
        }
    }

    #[test]
    fn single_data_errors_trip_one_or_two_stabilizers() {
        for basis in [Basis::Z, Basis::X] {
            for d in [3, 5, 7, 9] {
                for f in 0..=2 {
                    let l = build_layout(d, f, basis).unwrap();
                    for i in 0..d {
                        let e = PauliString::single(
                            l.total_qubits(),
                            l.data_qubit(i),
                            basis.detected_error(),
                        );
                        let hits = l
                            .stabilizers()
                            .iter()
                            .filter(|s| anticommutes(s, &e).unwrap())
                            .count();
                        let boundary = i == 0 || i == d - 1;
                        assert_eq!(hits, if boundary { 1 } else { 2 });
                    }
                }
            }
        }
    }

    #[test]
    fn state_parsing() {
        for s in LogicalState::ALL {
            assert_eq!(s.to_string().parse::<LogicalState>().unwrap(), s);
            assert_eq!(s.tag().parse::<LogicalState>().unwrap(), s);
        }
        assert!("2_L".parse::<LogicalState>().is_err());
    }
}
