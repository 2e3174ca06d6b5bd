//! Sign-free Pauli operators in symplectic (x, z) form.

use crate::bits::BitVec;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// X, Y, Z in that order.
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// The 15 non-identity two-qubit Paulis, ordered lexicographically over (I, X, Y, Z)².
    pub fn two_qubit_non_identity() -> impl Iterator<Item = (Pauli, Pauli)> {
        const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        ALL.into_iter()
            .flat_map(|a| ALL.into_iter().map(move |b| (a, b)))
            .skip(1)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A Pauli operator on `n` qubits with the phase dropped.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVec,
    z: BitVec,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn from_masks(x: BitVec, z: BitVec) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Contract(format!(
                "x mask has {} qubits but z mask has {}",
                x.len(),
                z.len()
            )));
        }
        Ok(Self { x, z })
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    /// The same Pauli on every listed qubit.
    pub fn uniform(n: usize, qubits: impl IntoIterator<Item = usize>, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for q in qubits {
            s.set(q, p);
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        self.x.set(qubit, p.x_bit());
        self.z.set(qubit, p.z_bit());
    }

    pub fn x_mask(&self) -> &BitVec {
        &self.x
    }

    pub fn z_mask(&self) -> &BitVec {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.not_any() && self.z.not_any()
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (0..self.num_qubits())
            .filter(|&q| self.get(q) != Pauli::I)
            .count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|&q| self.get(q) != Pauli::I)
            .collect()
    }

    /// Product up to phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.x.xor_assign(&other.x);
        out.z.xor_assign(&other.z);
        Ok(out)
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::Contract(format!(
                "Pauli strings on {} and {} qubits",
                self.num_qubits(),
                other.num_qubits()
            )));
        }
        Ok(())
    }
}

/// Symplectic inner product `a.x·b.z + a.z·b.x mod 2`.
pub fn anticommutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.check_len(b)?;
    Ok(a.x.and_parity(&b.z) ^ a.z.and_parity(&b.x))
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString(")?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..self.num_qubits() {
            let p = self.get(q);
            if p != Pauli::I {
                if !first {
                    write!(f, "·")?;
                }
                write!(f, "{p}{q}")?;
                first = false;
            }
        }
        Ok(())
    }
}
