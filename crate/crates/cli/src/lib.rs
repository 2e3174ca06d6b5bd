//! Configuration and pipeline stages behind the `flagrep` binary.
//!
//! Every stage reads its inputs from, and writes its outputs to, one
//! directory per grid point: `<out>/d{d}_f{f}_{state}`.

use anyhow::{bail, Context, Result};
use flagrep_core::analysis::{
    category_ratios, correlation_matrix, defect_histogram, defect_rate_per_round, gate_error_ecdf,
    logical_error_rate, ConfigReport, ExperimentReport,
};
use flagrep_core::circuit::CircuitProgram;
use flagrep_core::decoder::{read_results_csv, write_results_csv};
use flagrep_core::experiment::{
    config_seed, decode_all, prepare, run, syndromes_of, Backend, RunSpec,
};
use flagrep_core::frame::{read_shots, sample, write_shots};
use flagrep_core::graph::{
    build_hardware_graph, build_sample_graph, edge_weight_summary, MatchingGraph, NodeOrder,
};
use flagrep_core::layout::{build_layout, CodeLayout, LogicalState};
use flagrep_core::noise::CalibrationModel;
use flagrep_core::syndrome::{read_syndrome_csv, write_syndrome_csv, RecordShape};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const DEFAULT_DISTANCES: [usize; 4] = [3, 5, 7, 9];
pub const DEFAULT_FLAGS: [usize; 3] = [0, 1, 2];
pub const DEFAULT_ROUNDS: usize = 10;
pub const DEFAULT_SHOTS: usize = 1_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "flagrep-out";

pub const RUN_FILE: &str = "run.json";
pub const CIRCUIT_FILE: &str = "circuit.txt";
pub const SHOTS_FILE: &str = "shots.txt";
pub const SYNDROME_FILE: &str = "syndromes.csv";
pub const GRAPH_FILE: &str = "graph.csv";
pub const GRAPH_META_FILE: &str = "graph.json";
pub const DECODE_FILE: &str = "decode.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const STRUCTURES_FILE: &str = "structures.csv";

/// Keys of the JSON config file. All optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub distances: Option<Vec<usize>>,
    pub flags: Option<Vec<usize>>,
    pub states: Option<Vec<LogicalState>>,
    pub rounds: Option<usize>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub calib: Option<PathBuf>,
    pub backend: Option<Backend>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub noise_scale: Option<f64>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config `{}`", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("config `{}` does not match the schema", path.display()))
    }

    /// `self` wins over `base` key by key.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            distances: self.distances.or(base.distances),
            flags: self.flags.or(base.flags),
            states: self.states.or(base.states),
            rounds: self.rounds.or(base.rounds),
            shots: self.shots.or(base.shots),
            seed: self.seed.or(base.seed),
            calib: self.calib.or(base.calib),
            backend: self.backend.or(base.backend),
            out: self.out.or(base.out),
            threads: self.threads.or(base.threads),
            noise_scale: self.noise_scale.or(base.noise_scale),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub distances: Vec<usize>,
    pub flags: Vec<usize>,
    pub states: Vec<LogicalState>,
    pub rounds: usize,
    pub shots: usize,
    pub seed: u64,
    /// `None` selects the bundled average profile.
    pub calib: Option<PathBuf>,
    pub backend: Backend,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub noise_scale: f64,
}

impl RunConfig {
    /// Flags over config file over `FLAGREP_OUT` over defaults.
    pub fn resolve(flags: Settings, file: Option<&Path>, env_out: Option<PathBuf>) -> Result<Self> {
        let from_file = match file {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        let s = flags.over(from_file);
        let cfg = RunConfig {
            distances: s.distances.unwrap_or_else(|| DEFAULT_DISTANCES.to_vec()),
            flags: s.flags.unwrap_or_else(|| DEFAULT_FLAGS.to_vec()),
            states: s.states.unwrap_or_else(|| LogicalState::ALL.to_vec()),
            rounds: s.rounds.unwrap_or(DEFAULT_ROUNDS),
            shots: s.shots.unwrap_or(DEFAULT_SHOTS),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            calib: s.calib,
            backend: s.backend.unwrap_or(Backend::Hardware),
            out: s.out.or(env_out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            threads: s.threads,
            noise_scale: s.noise_scale.unwrap_or(1.0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            bail!("shots must be at least 1");
        }
        if self.rounds == 0 {
            bail!("rounds must be at least 1");
        }
        if self.distances.is_empty() || self.flags.is_empty() || self.states.is_empty() {
            bail!("distances, flags and states must each list at least one value");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            bail!("noise scale must be a finite non-negative number, got {}", self.noise_scale);
        }
        for &d in &self.distances {
            for &f in &self.flags {
                for &st in &self.states {
                    build_layout(d, f, st.basis())?;
                }
            }
        }
        Ok(())
    }

    /// Grid points ordered by flags, then distance, then state.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut v = Vec::new();
        for &flags in &self.flags {
            for &distance in &self.distances {
                for &state in &self.states {
                    v.push(GridPoint { distance, flags, state });
                }
            }
        }
        v.dedup();
        v
    }

    pub fn calibration(&self) -> Result<CalibrationModel> {
        let base = match &self.calib {
            Some(p) => CalibrationModel::load(p)
                .with_context(|| format!("cannot load calibration `{}`", p.display()))?,
            None => CalibrationModel::kyoto_avg(),
        };
        Ok(base.scaled(self.noise_scale)?)
    }

    pub fn spec(&self, p: GridPoint) -> RunSpec {
        RunSpec {
            distance: p.distance,
            flags: p.flags,
            rounds: self.rounds,
            state: p.state,
            shots: self.shots,
            seed: config_seed(self.seed, p.distance, p.flags, p.state),
        }
    }

    pub fn dir(&self, p: GridPoint) -> PathBuf {
        self.out.join(p.dir_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridPoint {
    pub distance: usize,
    pub flags: usize,
    pub state: LogicalState,
}

impl GridPoint {
    pub fn dir_name(&self) -> String {
        format!("d{}_f{}_{}", self.distance, self.flags, self.state.tag())
    }
}

/// Parameters fixed by `build-circuit` and read back by later stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub distance: usize,
    pub flags: usize,
    pub rounds: usize,
    pub state: LogicalState,
    pub seed: u64,
    pub chain: Vec<usize>,
}

impl RunMeta {
    fn layout(&self) -> Result<CodeLayout> {
        Ok(build_layout(self.distance, self.flags, self.state.basis())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub backend: Backend,
    pub degenerate_edges: usize,
}

fn require(dir: &Path, file: &str, stage: &str) -> Result<String> {
    let path = dir.join(file);
    if !path.is_file() {
        bail!("missing `{}`; run `{stage}` first", path.display());
    }
    fs::read_to_string(&path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<()> {
    let path = dir.join(file);
    fs::write(&path, contents).with_context(|| format!("cannot write `{}`", path.display()))
}

fn read_meta(dir: &Path) -> Result<RunMeta> {
    let text = require(dir, RUN_FILE, "build-circuit")?;
    serde_json::from_str(&text).with_context(|| format!("bad `{}` in `{}`", RUN_FILE, dir.display()))
}

fn read_circuit(dir: &Path) -> Result<CircuitProgram> {
    CircuitProgram::from_text(&require(dir, CIRCUIT_FILE, "build-circuit")?)
        .with_context(|| format!("bad `{CIRCUIT_FILE}` in `{}`", dir.display()))
}

fn read_graph(dir: &Path) -> Result<(MatchingGraph, GraphMeta)> {
    let g = MatchingGraph::from_csv(&require(dir, GRAPH_FILE, "graph")?)
        .with_context(|| format!("bad `{GRAPH_FILE}` in `{}`", dir.display()))?;
    let meta = serde_json::from_str(&require(dir, GRAPH_META_FILE, "graph")?)?;
    Ok((g, meta))
}

fn read_records(dir: &Path, shape: &RecordShape) -> Result<Vec<flagrep_core::frame::ShotRecord>> {
    let (bits, records) = read_shots(&require(dir, SHOTS_FILE, "sample")?)
        .with_context(|| format!("bad `{SHOTS_FILE}` in `{}`", dir.display()))?;
    if bits != shape.num_measurements() {
        bail!(
            "`{SHOTS_FILE}` in `{}` has {bits} bits per shot, the circuit measures {}",
            dir.display(),
            shape.num_measurements()
        );
    }
    Ok(records)
}

fn read_arrays(dir: &Path) -> Result<Vec<flagrep_core::syndrome::SyndromeArray>> {
    read_syndrome_csv(&require(dir, SYNDROME_FILE, "syndromes")?)
        .with_context(|| format!("bad `{SYNDROME_FILE}` in `{}`", dir.display()))
}

/// Writes the noisy circuit and the chain it is placed on.
pub fn build_circuits(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let calib = cfg.calibration()?;
    let mut dirs = Vec::new();
    for p in cfg.grid() {
        let spec = cfg.spec(p);
        let prep = prepare(&spec, &calib)
            .with_context(|| format!("cannot place the circuit for {}", p.dir_name()))?;
        let dir = cfg.dir(p);
        fs::create_dir_all(&dir)?;
        let meta = RunMeta {
            distance: p.distance,
            flags: p.flags,
            rounds: cfg.rounds,
            state: p.state,
            seed: spec.seed,
            chain: prep.chain,
        };
        write(&dir, RUN_FILE, &serde_json::to_string_pretty(&meta)?)?;
        write(&dir, CIRCUIT_FILE, &prep.noisy.to_text())?;
        dirs.push(dir);
    }
    Ok(dirs)
}

pub fn sample_shots(cfg: &RunConfig) -> Result<()> {
    for p in cfg.grid() {
        let dir = cfg.dir(p);
        let meta = read_meta(&dir)?;
        let circ = read_circuit(&dir)?;
        let records = sample(&circ, cfg.shots, meta.seed);
        write(&dir, SHOTS_FILE, &write_shots(&records, circ.num_measurements()))?;
    }
    Ok(())
}

pub fn extract_syndromes(cfg: &RunConfig) -> Result<()> {
    for p in cfg.grid() {
        let dir = cfg.dir(p);
        let meta = read_meta(&dir)?;
        let layout = meta.layout()?;
        let shape = RecordShape::new(&layout, meta.rounds);
        let records = read_records(&dir, &shape)?;
        let arrays = syndromes_of(&records, &layout, meta.rounds, meta.state)?;
        write(&dir, SYNDROME_FILE, &write_syndrome_csv(&arrays))?;
    }
    Ok(())
}

pub fn build_graphs(cfg: &RunConfig) -> Result<()> {
    for p in cfg.grid() {
        let dir = cfg.dir(p);
        let meta = read_meta(&dir)?;
        let layout = meta.layout()?;
        let (graph, degenerate_edges) = match cfg.backend {
            Backend::Hardware => (build_hardware_graph(&read_circuit(&dir)?, &layout, meta.rounds)?, 0),
            Backend::Sample => {
                let sg = build_sample_graph(&read_arrays(&dir)?, &layout, meta.rounds)?;
                (sg.graph, sg.degenerate_edges)
            }
        };
        write(&dir, GRAPH_FILE, &graph.to_csv())?;
        let gm = GraphMeta { backend: cfg.backend, degenerate_edges };
        write(&dir, GRAPH_META_FILE, &serde_json::to_string_pretty(&gm)?)?;
    }
    Ok(())
}

pub fn decode(cfg: &RunConfig) -> Result<()> {
    for p in cfg.grid() {
        let dir = cfg.dir(p);
        let meta = read_meta(&dir)?;
        let (graph, _) = read_graph(&dir)?;
        let layout = meta.layout()?;
        let shape = RecordShape::new(&layout, meta.rounds);
        let records = read_records(&dir, &shape)?;
        let arrays = read_arrays(&dir)?;
        if arrays.len() != records.len() {
            bail!(
                "`{}` holds {} shots but `{}` holds {}; rerun `syndromes`",
                SYNDROME_FILE,
                arrays.len(),
                SHOTS_FILE,
                records.len()
            );
        }
        let rows = decode_all(&graph, &records, &arrays, &shape, meta.state)?;
        write(&dir, DECODE_FILE, &write_results_csv(&rows))?;
    }
    Ok(())
}

/// Per-point reports plus the grid summary in `<out>`.
pub fn analyze(cfg: &RunConfig) -> Result<ExperimentReport> {
    let calib = cfg.calibration()?;
    let mut configs = Vec::new();
    for p in cfg.grid() {
        let dir = cfg.dir(p);
        let meta = read_meta(&dir)?;
        let arrays = read_arrays(&dir)?;
        let rows = read_results_csv(&require(&dir, DECODE_FILE, "decode")?)?;
        let (graph, gm) = read_graph(&dir)?;
        let report = ConfigReport {
            distance: meta.distance,
            flags: meta.flags,
            rounds: meta.rounds,
            state: meta.state,
            seed: meta.seed,
            logical_error: logical_error_rate(&rows)?,
            defect_histogram: defect_histogram(&arrays).reported(),
            defect_rate_per_round: defect_rate_per_round(&arrays)?,
            category_ratios: category_ratios(&rows),
            edge_weight_summary: edge_weight_summary(&graph),
            degenerate_edges: gm.degenerate_edges,
            chain: meta.chain.clone(),
            gate_errors: gate_error_ecdf(&calib, &meta.chain)?,
        };
        write(&dir, REPORT_FILE, &serde_json::to_string_pretty(&report)?)?;
        if arrays.len() >= 2 {
            write(&dir, CORRELATION_FILE, &correlation_matrix(&arrays, NodeOrder::SpaceTime)?.to_csv())?;
        }
        configs.push(report);
    }
    finish_report(cfg, configs)
}

fn finish_report(cfg: &RunConfig, configs: Vec<ConfigReport>) -> Result<ExperimentReport> {
    let report = ExperimentReport::assemble(
        &cfg.backend.to_string(),
        cfg.rounds,
        cfg.shots,
        cfg.seed,
        configs,
    )?;
    fs::create_dir_all(&cfg.out)?;
    write(&cfg.out, REPORT_FILE, &report.to_json())?;
    write(&cfg.out, STRUCTURES_FILE, &report.structures_csv())?;
    Ok(report)
}

/// The whole grid in memory; writes per-point reports and graphs.
pub fn sweep(cfg: &RunConfig) -> Result<ExperimentReport> {
    let calib = cfg.calibration()?;
    let mut configs = Vec::new();
    for p in cfg.grid() {
        let out = run(&cfg.spec(p), &calib, cfg.backend)
            .with_context(|| format!("grid point {} failed", p.dir_name()))?;
        let dir = cfg.dir(p);
        fs::create_dir_all(&dir)?;
        write(&dir, REPORT_FILE, &serde_json::to_string_pretty(&out.report)?)?;
        write(&dir, GRAPH_FILE, &out.graph.to_csv())?;
        configs.push(out.report);
    }
    finish_report(cfg, configs)
}
