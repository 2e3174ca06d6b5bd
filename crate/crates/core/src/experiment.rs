//! One memory experiment end to end: chain, circuit, noise, shots, graph, decoding.

use crate::analysis::{
    category_ratios, defect_histogram, defect_rate_per_round, gate_error_ecdf, logical_error_rate,
    ConfigReport,
};
use crate::chain::select_chain;
use crate::circuit::{build_memory_experiment, CircuitProgram};
use crate::decoder::{DecodeRow, Decoder};
use crate::error::{Error, Result};
use crate::frame::{sample, ShotRecord};
use crate::graph::{build_hardware_graph, build_sample_graph, edge_weight_summary, MatchingGraph};
use crate::layout::{build_layout, Basis, CodeLayout, LogicalState};
use crate::noise::{attach_noise, CalibrationModel};
use crate::syndrome::{compute_syndromes, defects, measured_data, RecordShape, SyndromeArray};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Hardware,
    Sample,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Hardware => "hardware",
            Backend::Sample => "sample",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hardware" => Ok(Backend::Hardware),
            "sample" => Ok(Backend::Sample),
            _ => Err(Error::Parameter(format!("backend must be `hardware` or `sample`, got `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSpec {
    pub distance: usize,
    pub flags: usize,
    pub rounds: usize,
    pub state: LogicalState,
    pub shots: usize,
    pub seed: u64,
}

impl RunSpec {
    pub fn layout(&self) -> Result<CodeLayout> {
        build_layout(self.distance, self.flags, self.state.basis())
    }
}

/// Seed of one grid point, mixed from the run seed with SplitMix64.
pub fn config_seed(seed: u64, distance: usize, flags: usize, state: LogicalState) -> u64 {
    let idx = LogicalState::ALL.iter().position(|&s| s == state).unwrap() as u64;
    let mut z = seed
        ^ (distance as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ ((flags as u64) << 40)
        ^ (idx << 56);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noisy program of a run, placed on the cheapest chain of the calibrated device.
pub struct Prepared {
    pub layout: CodeLayout,
    pub chain: Vec<usize>,
    pub noisy: CircuitProgram,
}

pub fn prepare(spec: &RunSpec, calib: &CalibrationModel) -> Result<Prepared> {
    let layout = spec.layout()?;
    let device = calib.coupling_graph()?;
    let chain = select_chain(&device, layout.total_qubits(), &calib.pair_costs()?)?;
    let ideal = build_memory_experiment(&layout, spec.rounds, spec.state)?;
    let noisy = attach_noise(&ideal, calib, &chain)?;
    Ok(Prepared { layout, chain, noisy })
}

pub fn syndromes_of(
    records: &[ShotRecord],
    layout: &CodeLayout,
    rounds: usize,
    state: LogicalState,
) -> Result<Vec<SyndromeArray>> {
    records
        .par_iter()
        .map(|r| compute_syndromes(r, layout, rounds, state))
        .collect()
}

pub fn decode_all(
    graph: &MatchingGraph,
    records: &[ShotRecord],
    arrays: &[SyndromeArray],
    shape: &RecordShape,
    state: LogicalState,
) -> Result<Vec<DecodeRow>> {
    let decoder = Decoder::new(graph);
    records
        .par_iter()
        .zip(arrays.par_iter())
        .enumerate()
        .map(|(shot, (r, a))| {
            let def = defects(a);
            let out = decoder.decode(&def, &measured_data(r, shape), state)?;
            Ok(DecodeRow {
                shot,
                defect_count: def.len(),
                category: out.category,
                failure: out.failure,
            })
        })
        .collect()
}

pub struct RunOutput {
    pub report: ConfigReport,
    pub arrays: Vec<SyndromeArray>,
    pub graph: MatchingGraph,
}

pub fn run(spec: &RunSpec, calib: &CalibrationModel, backend: Backend) -> Result<RunOutput> {
    if spec.shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    let prep = prepare(spec, calib)?;
    let records = sample(&prep.noisy, spec.shots, spec.seed);
    let arrays = syndromes_of(&records, &prep.layout, spec.rounds, spec.state)?;
    let (graph, degenerate) = match backend {
        Backend::Hardware => (build_hardware_graph(&prep.noisy, &prep.layout, spec.rounds)?, 0),
        Backend::Sample => {
            let sg = build_sample_graph(&arrays, &prep.layout, spec.rounds)?;
            (sg.graph, sg.degenerate_edges)
        }
    };
    let shape = RecordShape::new(&prep.layout, spec.rounds);
    let rows = decode_all(&graph, &records, &arrays, &shape, spec.state)?;
    let report = ConfigReport {
        distance: spec.distance,
        flags: spec.flags,
        rounds: spec.rounds,
        state: spec.state,
        seed: spec.seed,
        logical_error: logical_error_rate(&rows)?,
        defect_histogram: defect_histogram(&arrays).reported(),
        defect_rate_per_round: defect_rate_per_round(&arrays)?,
        category_ratios: category_ratios(&rows),
        edge_weight_summary: edge_weight_summary(&graph),
        degenerate_edges: degenerate,
        chain: prep.chain.clone(),
        gate_errors: gate_error_ecdf(calib, &prep.chain)?,
    };
    Ok(RunOutput { report, arrays, graph })
}

/// States of both bases, or of one.
pub fn states_for(bases: &[Basis]) -> Vec<LogicalState> {
    LogicalState::ALL
        .into_iter()
        .filter(|s| bases.contains(&s.basis()))
        .collect()
}
