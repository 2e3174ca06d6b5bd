//! Aggregate statistics over sampled and decoded shots.

use crate::decoder::{Category, DecodeRow};
use crate::error::{Error, Result};
use crate::graph::{EdgeKind, NodeOrder, SampleMoments};
use crate::layout::LogicalState;
use crate::noise::CalibrationModel;
use crate::syndrome::SyndromeArray;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// Histogram entries at or below this probability are not reported.
pub const HISTOGRAM_FLOOR: f64 = 1e-5;
/// Correlation entries above this value are flagged for display truncation.
pub const CORRELATION_DISPLAY_MAX: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub failures: usize,
    pub shots: usize,
    pub rate: f64,
    pub stderr: f64,
}

impl RateEstimate {
    pub fn new(failures: usize, shots: usize) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Parameter("rate of an empty group".into()));
        }
        let rate = failures as f64 / shots as f64;
        Ok(Self {
            failures,
            shots,
            rate,
            stderr: (rate * (1.0 - rate) / shots as f64).sqrt(),
        })
    }

    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.failures, self.shots, z)
    }
}

pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    (lo, (centre + half).min(1.0))
}

pub const Z95: f64 = 1.959_963_984_540_054;

pub fn logical_error_rate(rows: &[DecodeRow]) -> Result<RateEstimate> {
    RateEstimate::new(rows.iter().filter(|r| r.failure).count(), rows.len())
}

/// Mean of per-state rates; the error combines the per-state errors.
pub fn average_rate(per_state: &[RateEstimate]) -> Result<RateEstimate> {
    if per_state.is_empty() {
        return Err(Error::Parameter("no states to average".into()));
    }
    let k = per_state.len() as f64;
    Ok(RateEstimate {
        failures: per_state.iter().map(|r| r.failures).sum(),
        shots: per_state.iter().map(|r| r.shots).sum(),
        rate: per_state.iter().map(|r| r.rate).sum::<f64>() / k,
        stderr: per_state.iter().map(|r| r.stderr * r.stderr).sum::<f64>().sqrt() / k,
    })
}

/// Suppression factor Λ from `ln p(d) = a − (ln Λ / 2)·d`, fitted by maximum
/// likelihood on Poisson failure counts so zero-failure points contribute.
/// Returns `None` when there are no failures at all.
pub fn suppression_factor(points: &[(usize, RateEstimate)]) -> Option<f64> {
    let total_k: f64 = points.iter().map(|(_, r)| r.failures as f64).sum();
    let total_n: f64 = points.iter().map(|(_, r)| r.shots as f64).sum();
    if total_k == 0.0 || points.len() < 2 {
        return None;
    }
    let loglik = |a: f64, b: f64| -> f64 {
        points
            .iter()
            .map(|&(d, r)| {
                let eta = a + b * d as f64;
                r.failures as f64 * eta - r.shots as f64 * eta.exp()
            })
            .sum()
    };
    let (mut a, mut b) = ((total_k / total_n).ln(), 0.0);
    for _ in 0..200 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(d, r) in points {
            let x = d as f64;
            let mu = r.shots as f64 * (a + b * x).exp();
            let resid = r.failures as f64 - mu;
            ga += resid;
            gb += resid * x;
            haa += mu;
            hab += mu * x;
            hbb += mu * x * x;
        }
        let det = haa * hbb - hab * hab;
        if det <= 0.0 {
            break;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        let base = loglik(a, b);
        let mut step = 1.0;
        while step > 1e-8 && loglik(a + step * da, b + step * db) < base {
            step *= 0.5;
        }
        a += step * da;
        b += step * db;
        if (step * da).abs() < 1e-12 && (step * db).abs() < 1e-12 {
            break;
        }
    }
    Some((-2.0 * b).exp())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefectHistogram {
    pub shots: usize,
    /// Probability of each observed defect count.
    pub probabilities: BTreeMap<usize, f64>,
}

impl DefectHistogram {
    /// Entries above [`HISTOGRAM_FLOOR`].
    pub fn reported(&self) -> BTreeMap<usize, f64> {
        self.probabilities
            .iter()
            .filter(|(_, &p)| p > HISTOGRAM_FLOOR)
            .map(|(&k, &p)| (k, p))
            .collect()
    }

    pub fn even_odd(&self) -> (f64, f64) {
        self.probabilities.iter().fold((0.0, 0.0), |(e, o), (&k, &p)| {
            if k % 2 == 0 {
                (e + p, o)
            } else {
                (e, o + p)
            }
        })
    }
}

pub fn defect_histogram(arrays: &[SyndromeArray]) -> DefectHistogram {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for a in arrays {
        *counts.entry(a.defect_count()).or_default() += 1;
    }
    let n = arrays.len() as f64;
    DefectHistogram {
        shots: arrays.len(),
        probabilities: counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRates {
    /// `per_syndrome[s][t]`.
    pub per_syndrome: Vec<Vec<f64>>,
    /// Mean over syndromes, indexed by `t`.
    pub average: Vec<f64>,
}

pub fn defect_rate_per_round(arrays: &[SyndromeArray]) -> Result<DefectRates> {
    let first = arrays
        .first()
        .ok_or_else(|| Error::Parameter("no syndrome samples".into()))?;
    let (rows, n) = (first.num_rows(), first.n_synd());
    let mut counts = vec![vec![0usize; rows]; n];
    for a in arrays {
        if a.num_rows() != rows || a.n_synd() != n {
            return Err(Error::Contract("syndrome arrays differ in shape".into()));
        }
        for i in a.bits().iter_ones() {
            counts[i % n][i / n] += 1;
        }
    }
    let shots = arrays.len() as f64;
    let per_syndrome: Vec<Vec<f64>> = counts
        .iter()
        .map(|c| c.iter().map(|&x| x as f64 / shots).collect())
        .collect();
    let average = (0..rows)
        .map(|t| per_syndrome.iter().map(|c| c[t]).sum::<f64>() / n as f64)
        .collect();
    Ok(DefectRates { per_syndrome, average })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    pub order: NodeOrder,
    pub rounds: usize,
    pub n_synd: usize,
    /// `values[i][j]` for one-based labels `i + 1`, `j + 1` in `order`.
    pub values: Vec<Vec<f64>>,
    /// Off-diagonal entries above [`CORRELATION_DISPLAY_MAX`].
    pub above_display_max: usize,
}

impl CorrelationMatrix {
    /// Internal node id (`t·n_synd + s`) of matrix row `i`.
    pub fn node_of_row(&self, i: usize) -> usize {
        row_node(self.order, self.rounds, self.n_synd, i)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# ordering={} rounds={} n_synd={}\n",
            self.order, self.rounds, self.n_synd
        );
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn row_node(order: NodeOrder, rounds: usize, n_synd: usize, i: usize) -> usize {
    match order {
        NodeOrder::SpaceTime => i,
        NodeOrder::TimeSpace => {
            let (s, t) = (i / (rounds + 1), i % (rounds + 1));
            t * n_synd + s
        }
    }
}

pub fn correlation_matrix(arrays: &[SyndromeArray], order: NodeOrder) -> Result<CorrelationMatrix> {
    if arrays.len() < 2 {
        return Err(Error::Parameter("correlations need at least 2 shots".into()));
    }
    let moments = SampleMoments::new(arrays)?;
    let (rounds, n_synd) = (arrays[0].num_rows() - 1, arrays[0].n_synd());
    let m = moments.num_nodes();
    let mut values = vec![vec![0.0; m]; m];
    let mut above = 0;
    for i in 0..m {
        let u = row_node(order, rounds, n_synd, i);
        for j in 0..i {
            let v = row_node(order, rounds, n_synd, j);
            let p = moments.pair(u, v).p;
            values[i][j] = p;
            values[j][i] = p;
            if p > CORRELATION_DISPLAY_MAX {
                above += 2;
            }
        }
    }
    Ok(CorrelationMatrix {
        order,
        rounds,
        n_synd,
        values,
        above_display_max: above,
    })
}

pub fn category_ratios(rows: &[DecodeRow]) -> BTreeMap<Category, f64> {
    let mut out: BTreeMap<Category, f64> = Category::ALL.iter().map(|&c| (c, 0.0)).collect();
    if rows.is_empty() {
        return out;
    }
    for r in rows {
        *out.get_mut(&r.category).unwrap() += 1.0;
    }
    let n = rows.len() as f64;
    for v in out.values_mut() {
        *v /= n;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    /// `(rate, fraction of values ≤ rate)`, one point per distinct rate.
    pub points: Vec<(f64, f64)>,
    pub mean: f64,
}

impl Ecdf {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("ECDF of an empty set".into()));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match points.last_mut() {
                Some(last) if last.0 == v => last.1 = frac,
                _ => points.push((v, frac)),
            }
        }
        Ok(Self {
            points,
            mean: values.iter().sum::<f64>() / n,
        })
    }

    /// Right-continuous step function value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(v, _)| *v <= x)
            .last()
            .map_or(0.0, |p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateErrorEcdf {
    /// Absent when the subset contains no coupled pair.
    pub ecr: Option<Ecdf>,
    pub sx: Ecdf,
    pub readout: Ecdf,
}

/// Gate-error distributions over physical `qubits`; ECR over the calibrated
/// pairs with both ends in the subset.
pub fn gate_error_ecdf(calib: &CalibrationModel, qubits: &[usize]) -> Result<GateErrorEcdf> {
    let set: BTreeSet<usize> = qubits.iter().copied().collect();
    let mut sx = Vec::new();
    let mut ro = Vec::new();
    for &q in &set {
        let c = calib.qubit(q)?;
        sx.push(c.sx_error);
        ro.push(c.readout_error);
    }
    let ecr: Vec<f64> = calib
        .pairs()
        .filter(|((a, b), _)| set.contains(a) && set.contains(b))
        .map(|(_, p)| p)
        .collect();
    Ok(GateErrorEcdf {
        ecr: if ecr.is_empty() { None } else { Some(Ecdf::from_values(ecr)?) },
        sx: Ecdf::from_values(sx)?,
        readout: Ecdf::from_values(ro)?,
    })
}

/// Statistics of one `(d, f, R, state)` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub distance: usize,
    pub flags: usize,
    pub rounds: usize,
    pub state: LogicalState,
    pub seed: u64,
    pub logical_error: RateEstimate,
    pub defect_histogram: BTreeMap<usize, f64>,
    pub defect_rate_per_round: DefectRates,
    pub category_ratios: BTreeMap<Category, f64>,
    pub edge_weight_summary: BTreeMap<EdgeKind, f64>,
    pub degenerate_edges: usize,
    pub chain: Vec<usize>,
    pub gate_errors: GateErrorEcdf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub distance: usize,
    pub flags: usize,
    /// Averaged over the states present.
    pub logical_error: RateEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub backend: String,
    pub rounds: usize,
    pub shots_per_state: usize,
    pub seed: u64,
    pub configs: Vec<ConfigReport>,
    pub structures: Vec<StructureSummary>,
    /// Fitted Λ per flag count, absent without failures.
    pub suppression: BTreeMap<usize, Option<f64>>,
}

impl ExperimentReport {
    pub fn assemble(
        backend: &str,
        rounds: usize,
        shots_per_state: usize,
        seed: u64,
        configs: Vec<ConfigReport>,
    ) -> Result<Self> {
        let mut grouped: BTreeMap<(usize, usize), Vec<RateEstimate>> = BTreeMap::new();
        for c in &configs {
            grouped.entry((c.flags, c.distance)).or_default().push(c.logical_error);
        }
        let mut structures = Vec::new();
        let mut by_flag: BTreeMap<usize, Vec<(usize, RateEstimate)>> = BTreeMap::new();
        for (&(f, d), rates) in &grouped {
            let avg = average_rate(rates)?;
            structures.push(StructureSummary {
                distance: d,
                flags: f,
                logical_error: avg,
            });
            by_flag.entry(f).or_default().push((d, avg));
        }
        let suppression = by_flag
            .into_iter()
            .map(|(f, pts)| (f, suppression_factor(&pts)))
            .collect();
        Ok(Self {
            backend: backend.to_string(),
            rounds,
            shots_per_state,
            seed,
            configs,
            structures,
            suppression,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn structures_csv(&self) -> String {
        let mut s = String::from("distance,flags,failures,shots,rate,stderr\n");
        for r in &self.structures {
            let e = &r.logical_error;
            writeln!(s, "{},{},{},{},{},{}", r.distance, r.flags, e.failures, e.shots, e.rate, e.stderr).unwrap();
        }
        s
    }
}
