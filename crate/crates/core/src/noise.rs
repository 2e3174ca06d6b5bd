//! Hardware calibration data and circuit-level noise attachment.
//!
//! Every ideal gate is wrapped by a Pauli channel whose rate is composed from
//! the basis gates it compiles to:
//!
//! | gate        | channel after the gate                         |
//! |-------------|------------------------------------------------|
//! | CNOT, CZ    | `DEPOL2(1 - (1-p_ecr)·(1-p_sx,a)²·(1-p_sx,b)²)` |
//! | H           | `DEPOL1(p_sx)`                                 |
//! | X           | `DEPOL1(p_x)`                                  |
//! | I, idle     | `DEPOL1(p_idle)` once per layer                |
//! | RESET       | `XERR(p_reset)`                                |
//! | MEASURE     | `XERR(p_readout)` placed before the gate       |
//!
//! `R_Z` (and hence `Z`) is virtual and noiseless.

use crate::chain::{EdgeCosts, HeavyHexGraph};
use crate::circuit::{CircuitProgram, Instruction};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

const KYOTO_AVG: &str = include_str!("../data/kyoto_avg.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitCalibration {
    pub id: usize,
    pub sx_error: f64,
    pub x_error: f64,
    pub readout_error: f64,
    /// Defaults to `readout_error`: the conditional reset contains a measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset_error: Option<f64>,
    pub idle_error: f64,
}

impl QubitCalibration {
    pub fn reset_error(&self) -> f64 {
        self.reset_error.unwrap_or(self.readout_error)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCalibration {
    pub a: usize,
    pub b: usize,
    pub ecr_error: f64,
}

/// Informational timings; they do not enter the noise model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_1q_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_2q_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    qubits: Vec<QubitCalibration>,
    pairs: Vec<PairCalibration>,
    #[serde(default)]
    timings: Timings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationModel {
    qubits: BTreeMap<usize, QubitCalibration>,
    pairs: BTreeMap<(usize, usize), f64>,
    timings: Timings,
}

fn load_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Load {
        path: path.into(),
        message: message.into(),
    }
}

fn check_probability(path: String, p: f64) -> Result<()> {
    if p.is_nan() || !(0.0..1.0).contains(&p) {
        return Err(load_err(path, format!("probability {p} outside [0, 1)")));
    }
    Ok(())
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl CalibrationModel {
    pub fn from_json_str(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(load_err("$", "empty calibration file"));
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: CalibrationFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            load_err(path, e.into_inner().to_string())
        })?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json_str(&text)
    }

    /// Bundled uniform profile: average rates of the 49 qubits of a
    /// distance-9 double-flag chain, spread over a 127-qubit heavy-hex map.
    pub fn kyoto_avg() -> Self {
        Self::from_json_str(KYOTO_AVG).expect("bundled calibration is valid")
    }

    fn from_file(file: CalibrationFile) -> Result<Self> {
        let mut qubits = BTreeMap::new();
        for (i, q) in file.qubits.into_iter().enumerate() {
            let at = |field: &str| format!("qubits[{i}].{field}");
            check_probability(at("sx_error"), q.sx_error)?;
            check_probability(at("x_error"), q.x_error)?;
            check_probability(at("readout_error"), q.readout_error)?;
            if let Some(r) = q.reset_error {
                check_probability(at("reset_error"), r)?;
            }
            check_probability(at("idle_error"), q.idle_error)?;
            if qubits.insert(q.id, q).is_some() {
                return Err(load_err(at("id"), "duplicate qubit id"));
            }
        }
        let mut pairs = BTreeMap::new();
        for (i, p) in file.pairs.into_iter().enumerate() {
            let at = |field: &str| format!("pairs[{i}].{field}");
            check_probability(at("ecr_error"), p.ecr_error)?;
            for (field, q) in [("a", p.a), ("b", p.b)] {
                if !qubits.contains_key(&q) {
                    return Err(load_err(at(field), format!("unknown qubit {q}")));
                }
            }
            if p.a == p.b {
                return Err(load_err(at("b"), "pair joins a qubit to itself"));
            }
            if pairs.insert(pair_key(p.a, p.b), p.ecr_error).is_some() {
                return Err(load_err(at("a"), "duplicate pair"));
            }
        }
        Ok(Self {
            qubits,
            pairs,
            timings: file.timings,
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = CalibrationFile {
            qubits: self.qubits.values().cloned().collect(),
            pairs: self
                .pairs
                .iter()
                .map(|(&(a, b), &ecr_error)| PairCalibration { a, b, ecr_error })
                .collect(),
            timings: self.timings.clone(),
        };
        serde_json::to_string_pretty(&file).expect("calibration serializes")
    }

    /// Identical rates on every qubit of `graph` and every coupler.
    pub fn uniform(graph: &HeavyHexGraph, qubit: &QubitCalibration, ecr_error: f64) -> Self {
        let qubits = graph
            .nodes()
            .map(|id| (id, QubitCalibration { id, ..qubit.clone() }))
            .collect();
        let pairs = graph.edges().map(|e| (e, ecr_error)).collect();
        Self {
            qubits,
            pairs,
            timings: Timings::default(),
        }
    }

    /// Every error probability multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) {
            return Err(Error::Parameter(format!("bad noise scale {factor}")));
        }
        let s = |p: f64| -> Result<f64> {
            let v = p * factor;
            if v >= 1.0 {
                return Err(Error::Parameter(format!(
                    "scaling {p} by {factor} leaves [0, 1)"
                )));
            }
            Ok(v)
        };
        let mut out = self.clone();
        for q in out.qubits.values_mut() {
            q.sx_error = s(q.sx_error)?;
            q.x_error = s(q.x_error)?;
            q.readout_error = s(q.readout_error)?;
            q.reset_error = q.reset_error.map(s).transpose()?;
            q.idle_error = s(q.idle_error)?;
        }
        for p in out.pairs.values_mut() {
            *p = s(*p)?;
        }
        Ok(out)
    }

    pub fn qubit(&self, id: usize) -> Result<&QubitCalibration> {
        self.qubits
            .get(&id)
            .ok_or_else(|| Error::Calibration(format!("no calibration for qubit {id}")))
    }

    pub fn qubits(&self) -> impl Iterator<Item = &QubitCalibration> {
        self.qubits.values()
    }

    pub fn ecr_error(&self, a: usize, b: usize) -> Result<f64> {
        self.pairs
            .get(&pair_key(a, b))
            .copied()
            .ok_or_else(|| Error::Calibration(format!("no calibration for pair ({a}, {b})")))
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.pairs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn timings(&self) -> &Timings {
        &self.timings
    }

    pub fn coupling_graph(&self) -> Result<HeavyHexGraph> {
        let mut g = HeavyHexGraph::from_edges(self.pairs.keys().copied())?;
        for &q in self.qubits.keys() {
            g.add_node(q);
        }
        Ok(g)
    }

    /// Composed two-qubit rates of every coupler, for chain selection.
    pub fn pair_costs(&self) -> Result<EdgeCosts> {
        self.pairs
            .keys()
            .map(|&(a, b)| Ok(((a, b), compose_two_qubit_rate(self, a, b)?)))
            .collect()
    }
}

/// Error of a CNOT/CZ built from one ECR and two √X per qubit (R_Z is free).
pub fn compose_two_qubit_rate(calib: &CalibrationModel, a: usize, b: usize) -> Result<f64> {
    let ecr = calib.ecr_error(a, b)?;
    let sx_a = calib.qubit(a)?.sx_error;
    let sx_b = calib.qubit(b)?.sx_error;
    Ok(1.0 - (1.0 - ecr) * (1.0 - sx_a).powi(2) * (1.0 - sx_b).powi(2))
}

/// Channel rates resolved onto circuit (chain) qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveGateRates {
    pub h_depol1: Vec<f64>,
    pub x_depol1: Vec<f64>,
    pub idle_depol1: Vec<f64>,
    pub reset_xflip: Vec<f64>,
    pub measure_xflip: Vec<f64>,
    /// Shared by CNOT and CZ, keyed by ordered chain pair.
    pub two_qubit_depol2: BTreeMap<(usize, usize), f64>,
}

impl EffectiveGateRates {
    /// Resolves per-qubit rates; pair rates are filled lazily by `pair`.
    pub fn new(calib: &CalibrationModel, mapping: &[usize]) -> Result<Self> {
        let mut out = Self {
            h_depol1: Vec::with_capacity(mapping.len()),
            x_depol1: Vec::with_capacity(mapping.len()),
            idle_depol1: Vec::with_capacity(mapping.len()),
            reset_xflip: Vec::with_capacity(mapping.len()),
            measure_xflip: Vec::with_capacity(mapping.len()),
            two_qubit_depol2: BTreeMap::new(),
        };
        for &phys in mapping {
            let q = calib.qubit(phys)?;
            out.h_depol1.push(q.sx_error);
            out.x_depol1.push(q.x_error);
            out.idle_depol1.push(q.idle_error);
            out.reset_xflip.push(q.reset_error());
            out.measure_xflip.push(q.readout_error);
        }
        Ok(out)
    }

    fn pair(&mut self, calib: &CalibrationModel, mapping: &[usize], a: usize, b: usize) -> Result<f64> {
        let key = pair_key(a, b);
        if let Some(&p) = self.two_qubit_depol2.get(&key) {
            return Ok(p);
        }
        let p = compose_two_qubit_rate(calib, mapping[a], mapping[b])?;
        self.two_qubit_depol2.insert(key, p);
        Ok(p)
    }
}

/// Wraps every ideal operation of `circ` in its noise channel and adds idle
/// noise for qubits untouched in a layer. Zero-rate channels are omitted.
/// `mapping[chain_qubit]` is the physical qubit whose calibration applies.
pub fn attach_noise(
    circ: &CircuitProgram,
    calib: &CalibrationModel,
    mapping: &[usize],
) -> Result<CircuitProgram> {
    let n = circ.qubit_count();
    if mapping.len() < n {
        return Err(Error::Mapping(format!(
            "mapping covers {} of {n} circuit qubits",
            mapping.len()
        )));
    }
    for (chain, &phys) in mapping.iter().enumerate().take(n) {
        if calib.qubit(phys).is_err() {
            return Err(Error::Mapping(format!(
                "circuit qubit {chain} maps to uncalibrated physical qubit {phys}"
            )));
        }
    }
    let mut rates = EffectiveGateRates::new(calib, &mapping[..n])?;
    let mut out = Vec::with_capacity(circ.len() * 2);
    let push_noise = |out: &mut Vec<Instruction>, ins: Instruction| {
        if ins.probability().is_some_and(|p| p > 0.0) {
            out.push(ins);
        }
    };
    let instructions = circ.instructions();
    for layer in circ.layers() {
        let mut touched = vec![false; n];
        for ins in &instructions[layer.clone()] {
            if !ins.is_noise() {
                for q in ins.qubits() {
                    touched[q] = true;
                }
            }
        }
        for &ins in &instructions[layer.clone()] {
            match ins {
                Instruction::Measure(q) => {
                    push_noise(&mut out, Instruction::XErr(rates.measure_xflip[q], q));
                    out.push(ins);
                }
                Instruction::Reset(q) => {
                    out.push(ins);
                    push_noise(&mut out, Instruction::XErr(rates.reset_xflip[q], q));
                }
                Instruction::H(q) => {
                    out.push(ins);
                    push_noise(&mut out, Instruction::Depol1(rates.h_depol1[q], q));
                }
                Instruction::X(q) => {
                    out.push(ins);
                    push_noise(&mut out, Instruction::Depol1(rates.x_depol1[q], q));
                }
                Instruction::I(q) => {
                    out.push(ins);
                    push_noise(&mut out, Instruction::Depol1(rates.idle_depol1[q], q));
                }
                Instruction::Cnot(a, b) | Instruction::Cz(a, b) => {
                    out.push(ins);
                    let p = rates.pair(calib, &mapping[..n], a, b)?;
                    push_noise(&mut out, Instruction::Depol2(p, a, b));
                }
                _ => out.push(ins),
            }
        }
        for q in (0..n).filter(|&q| !touched[q]) {
            push_noise(&mut out, Instruction::Depol1(rates.idle_depol1[q], q));
        }
        if instructions.get(layer.end) == Some(&Instruction::Tick) {
            out.push(Instruction::Tick);
        }
    }
    CircuitProgram::from_instructions(n, out)
}
