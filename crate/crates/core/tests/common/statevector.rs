//! Dense statevector reference for noiseless Clifford programs whose
//! measurements are all deterministic.

use flagrep_core::circuit::{CircuitProgram, Instruction};
use flagrep_core::pauli::Pauli;
use num_complex::Complex64;

const EPS: f64 = 1e-9;

#[derive(Clone)]
pub struct State {
    amps: Vec<Complex64>,
}

impl State {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    fn h(&mut self, q: usize) {
        let m = 1 << q;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = (a + b) * r;
                self.amps[i | m] = (a - b) * r;
            }
        }
    }

    fn x(&mut self, q: usize) {
        let m = 1 << q;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    fn z(&mut self, q: usize) {
        let m = 1 << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a = -*a;
            }
        }
    }

    fn y(&mut self, q: usize) {
        // Y = i X Z
        self.z(q);
        self.x(q);
        for a in &mut self.amps {
            *a *= Complex64::new(0.0, 1.0);
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (mc, mt) = (1 << c, 1 << t);
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        let m = (1 << a) | (1 << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.x(q),
            Pauli::Y => self.y(q),
            Pauli::Z => self.z(q),
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        let m = 1 << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn definite(&self, q: usize) -> bool {
        let p = self.prob_one(q);
        assert!(p < EPS || p > 1.0 - EPS, "outcome of qubit {q} is random (p1 = {p})");
        p > 0.5
    }

    /// Runs one instruction; returns the outcome of a measurement.
    pub fn step(&mut self, ins: &Instruction) -> Option<bool> {
        match *ins {
            Instruction::H(q) => self.h(q),
            Instruction::Cnot(c, t) => self.cnot(c, t),
            Instruction::Cz(a, b) => self.cz(a, b),
            Instruction::X(q) => self.x(q),
            Instruction::Z(q) => self.z(q),
            Instruction::Measure(q) => return Some(self.definite(q)),
            Instruction::Reset(q) => {
                if self.definite(q) {
                    self.x(q);
                }
            }
            _ => {}
        }
        None
    }
}

/// Per-position snapshots of a noiseless run: the state before instruction
/// `k` and the outcomes recorded so far.
pub struct Reference {
    pub states: Vec<State>,
    pub outcomes: Vec<bool>,
    pub measured_before: Vec<usize>,
}

pub fn reference(circ: &CircuitProgram) -> Reference {
    let mut s = State::zero(circ.qubit_count());
    let mut states = Vec::with_capacity(circ.len() + 1);
    let mut outcomes = Vec::new();
    let mut measured_before = Vec::with_capacity(circ.len() + 1);
    for ins in circ.instructions() {
        states.push(s.clone());
        measured_before.push(outcomes.len());
        if let Some(b) = s.step(ins) {
            outcomes.push(b);
        }
    }
    states.push(s);
    measured_before.push(outcomes.len());
    Reference { states, outcomes, measured_before }
}

/// Measurement indices whose outcome changes when `paulis` hits the state
/// just before instruction `position`.
pub fn flipped(
    circ: &CircuitProgram,
    reference: &Reference,
    position: usize,
    paulis: &[(usize, Pauli)],
) -> Vec<usize> {
    let mut s = reference.states[position].clone();
    for &(q, p) in paulis {
        s.apply_pauli(q, p);
    }
    let mut k = reference.measured_before[position];
    let mut out = Vec::new();
    for ins in &circ.instructions()[position..] {
        if let Some(b) = s.step(ins) {
            if b != reference.outcomes[k] {
                out.push(k);
            }
            k += 1;
        }
    }
    out
}
