//! Space-time matching graph with S, T, ST and boundary edges.
//!
//! Node `t·n_synd + s` is syndrome bit `(t, s)`; the virtual boundary node
//! follows the last syndrome node. Each edge carries the data qubits (by data
//! index) whose flip it stands for: S and ST edges the qubit shared by their
//! two columns, boundary edges the outermost qubit, T edges none.

use crate::bits::BitVec;
use crate::chain::HeavyHexGraph;
use crate::circuit::{build_memory_experiment, CircuitProgram, Instruction};
use crate::error::{Error, Result};
use crate::frame::{trace_batch, FaultInjection};
use crate::layout::{CodeLayout, LogicalState};
use crate::noise::{attach_noise, CalibrationModel, QubitCalibration};
use crate::pauli::Pauli;
use crate::syndrome::{syndrome_flips, RecordShape, SyndromeArray};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

pub const P_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    S,
    T,
    ST,
    #[serde(rename = "BOUNDARY")]
    Boundary,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::S => "S",
            EdgeKind::T => "T",
            EdgeKind::ST => "ST",
            EdgeKind::Boundary => "BOUNDARY",
        })
    }
}

impl std::str::FromStr for EdgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "S" => EdgeKind::S,
            "T" => EdgeKind::T,
            "ST" => EdgeKind::ST,
            "BOUNDARY" => EdgeKind::Boundary,
            _ => return Err(Error::Parameter(format!("unknown edge kind `{s}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    /// Equal to the virtual node for boundary edges.
    pub b: usize,
    pub kind: EdgeKind,
    pub p: f64,
    pub w: f64,
    pub correction: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeOrder {
    SpaceTime,
    TimeSpace,
}

impl fmt::Display for NodeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeOrder::SpaceTime => "space-time",
            NodeOrder::TimeSpace => "time-space",
        })
    }
}

/// One-based node label with `1 ≤ t ≤ R+1`, `1 ≤ s ≤ d−1`.
///
/// Space-time: `s + (d−1)(t−1)`. Time-space: `t + (R+1)(s−1)`.
pub fn node_index(t: usize, s: usize, d: usize, rounds: usize, order: NodeOrder) -> Result<usize> {
    if d < 2 || !(1..d).contains(&s) || !(1..=rounds + 1).contains(&t) {
        return Err(Error::Parameter(format!(
            "node (t={t}, s={s}) outside 1..={} x 1..={}",
            rounds + 1,
            d.saturating_sub(1)
        )));
    }
    Ok(match order {
        NodeOrder::SpaceTime => s + (d - 1) * (t - 1),
        NodeOrder::TimeSpace => t + (rounds + 1) * (s - 1),
    })
}

pub fn weight_from_probability(p: f64) -> f64 {
    let p = if p.is_nan() { P_MIN } else { p.clamp(P_MIN, 0.5) };
    ((1.0 - p) / p).ln()
}

/// Probability that exactly one of two independent events fires.
pub fn combine(pa: f64, pb: f64) -> f64 {
    pa * (1.0 - pb) + pb * (1.0 - pa)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEstimate {
    pub p: f64,
    /// Denominator of the estimator was not positive; `p` was forced to 0.
    pub degenerate: bool,
}

/// Edge probability from node marginals and their joint moment.
pub fn pair_probability(xi: f64, xj: f64, xij: f64) -> PairEstimate {
    let den = 1.0 - 2.0 * xi - 2.0 * xj + 4.0 * xij;
    if den <= 0.0 {
        return PairEstimate { p: 0.0, degenerate: true };
    }
    let arg = 1.0 - 4.0 * (xij - xi * xj) / den;
    let p = if arg < 0.0 { 0.5 } else { 0.5 - 0.5 * arg.sqrt() };
    PairEstimate {
        p: p.clamp(0.0, 0.5),
        degenerate: false,
    }
}

/// Per-node and pairwise set counts over a batch of syndrome arrays.
pub struct SampleMoments {
    shots: usize,
    columns: Vec<BitVec>,
    counts: Vec<usize>,
}

impl SampleMoments {
    pub fn new(arrays: &[SyndromeArray]) -> Result<Self> {
        let first = arrays
            .first()
            .ok_or_else(|| Error::Parameter("no syndrome samples".into()))?;
        let nodes = first.bits().len();
        let shots = arrays.len();
        let mut columns = vec![BitVec::zeros(shots); nodes];
        for (k, a) in arrays.iter().enumerate() {
            if a.bits().len() != nodes {
                return Err(Error::Contract(format!(
                    "sample {k} has {} syndrome bits, expected {nodes}",
                    a.bits().len()
                )));
            }
            for i in a.bits().iter_ones() {
                columns[i].set(k, true);
            }
        }
        let counts = columns.iter().map(BitVec::count_ones).collect();
        Ok(Self { shots, columns, counts })
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn num_nodes(&self) -> usize {
        self.columns.len()
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.shots as f64
    }

    pub fn joint(&self, i: usize, j: usize) -> f64 {
        let both = self.columns[i]
            .words()
            .iter()
            .zip(self.columns[j].words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum::<usize>();
        both as f64 / self.shots as f64
    }

    pub fn pair(&self, i: usize, j: usize) -> PairEstimate {
        let (i, j) = (i.min(j), i.max(j));
        pair_probability(self.mean(i), self.mean(j), self.joint(i, j))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchingGraph {
    rounds: usize,
    n_synd: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

fn classify(n_synd: usize, a: usize, b: usize) -> Option<EdgeKind> {
    let (ta, sa) = (a / n_synd, a % n_synd);
    let (tb, sb) = (b / n_synd, b % n_synd);
    match (ta.abs_diff(tb), sa.abs_diff(sb)) {
        (0, 1) => Some(EdgeKind::S),
        (1, 0) => Some(EdgeKind::T),
        (1, 1) => Some(EdgeKind::ST),
        _ => None,
    }
}

impl MatchingGraph {
    /// Graph over the given node pairs with every probability zero. `b` equal
    /// to the node count denotes the boundary.
    fn from_pairs(rounds: usize, n_synd: usize, pairs: &BTreeSet<(usize, usize)>) -> Result<Self> {
        let nodes = (rounds + 1) * n_synd;
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let (kind, correction) = if b == nodes {
                let s = a % n_synd;
                let q = if s == 0 {
                    0
                } else if s == n_synd - 1 {
                    n_synd
                } else {
                    return Err(Error::Model(format!(
                        "boundary edge on interior syndrome {s}"
                    )));
                };
                (EdgeKind::Boundary, vec![q])
            } else {
                let kind = classify(n_synd, a, b).ok_or_else(|| {
                    Error::Model(format!("nodes {a} and {b} are not space-time neighbours"))
                })?;
                let correction = match kind {
                    EdgeKind::T => vec![],
                    _ => vec![(a % n_synd).max(b % n_synd)],
                };
                (kind, correction)
            };
            edges.push(Edge {
                a,
                b,
                kind,
                p: 0.0,
                w: weight_from_probability(0.0),
                correction,
            });
        }
        Self::from_edges(rounds, n_synd, edges)
    }

    pub fn from_edges(rounds: usize, n_synd: usize, edges: Vec<Edge>) -> Result<Self> {
        let nodes = (rounds + 1) * n_synd;
        let mut adjacency = vec![Vec::new(); nodes + 1];
        for (k, e) in edges.iter().enumerate() {
            if e.a >= nodes || e.b > nodes || e.a == e.b {
                return Err(Error::Model(format!("edge {k} has invalid endpoints {}-{}", e.a, e.b)));
            }
            if !(0.0..=0.5).contains(&e.p) || !(e.w >= 0.0) {
                return Err(Error::Model(format!("edge {k} has p={} w={}", e.p, e.w)));
            }
            adjacency[e.a].push((e.b, k));
            adjacency[e.b].push((e.a, k));
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(Self {
            rounds,
            n_synd,
            edges,
            adjacency,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn n_synd(&self) -> usize {
        self.n_synd
    }

    /// Syndrome nodes, excluding the boundary.
    pub fn num_nodes(&self) -> usize {
        (self.rounds + 1) * self.n_synd
    }

    pub fn boundary_node(&self) -> usize {
        self.num_nodes()
    }

    pub fn node(&self, t: usize, s: usize) -> usize {
        t * self.n_synd + s
    }

    pub fn coords(&self, node: usize) -> Option<(usize, usize)> {
        (node < self.num_nodes()).then(|| (node / self.n_synd, node % self.n_synd))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbour, edge index)` pairs sorted by neighbour.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = (a.min(b), a.max(b));
        self.adjacency[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.adjacency[a][i].1)
    }

    fn pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.a, e.b)).collect()
    }

    /// Same node and edge sets, ignoring probabilities.
    pub fn same_topology(&self, other: &MatchingGraph) -> bool {
        self.rounds == other.rounds && self.n_synd == other.n_synd && self.pairs() == other.pairs()
    }

    fn set_probability(&mut self, k: usize, p: f64) {
        let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 0.5) };
        self.edges[k].p = p;
        self.edges[k].w = weight_from_probability(p);
    }

    /// Edges whose endpoint sets XOR to `defects` (boundary ignored), using
    /// the fewest edges up to `max_edges`. Deterministic: the lowest remaining
    /// defect is always covered first, by neighbours in ascending order.
    pub fn decompose(&self, defects: &[usize], max_edges: usize) -> Option<Vec<usize>> {
        let mut set: BTreeSet<usize> = defects.iter().copied().collect();
        let mut chosen = Vec::new();
        (1..=max_edges).find_map(|depth| {
            self.cover(&mut set, depth, &mut chosen).then(|| chosen.clone())
        })
    }

    fn cover(&self, set: &mut BTreeSet<usize>, depth: usize, chosen: &mut Vec<usize>) -> bool {
        let Some(&first) = set.first() else {
            return true;
        };
        if depth == 0 || set.len() > 2 * depth {
            return false;
        }
        let boundary = self.boundary_node();
        for &(n, k) in &self.adjacency[first] {
            set.remove(&first);
            let toggled = n != boundary;
            if toggled && !set.remove(&n) {
                set.insert(n);
            }
            chosen.push(k);
            if self.cover(set, depth - 1, chosen) {
                return true;
            }
            chosen.pop();
            if toggled && !set.remove(&n) {
                set.insert(n);
            }
            set.insert(first);
        }
        false
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# rounds={} n_synd={}\nkind,t1,s1,t2,s2,p,w,correction_qubits\n",
            self.rounds, self.n_synd
        );
        let coord = |n: usize| match self.coords(n) {
            Some((t, s)) => format!("{t},{}", s + 1),
            None => "-1,-1".to_string(),
        };
        for e in &self.edges {
            let corr: Vec<String> = e.correction.iter().map(usize::to_string).collect();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                e.kind,
                coord(e.a),
                coord(e.b),
                e.p,
                e.w,
                corr.join(";")
            )
            .unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rounds = None;
        let mut n_synd = None;
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let line = line.trim();
            if let Some(meta) = line.strip_prefix('#') {
                for field in meta.split_whitespace() {
                    match field.split_once('=') {
                        Some(("rounds", v)) => rounds = v.parse().ok(),
                        Some(("n_synd", v)) => n_synd = v.parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with("kind,") {
                continue;
            }
            let (Some(r), Some(n)) = (rounds, n_synd) else {
                return Err(Error::format(ln, "edge rows before `# rounds=.. n_synd=..` header"));
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::format(ln, format!("expected 8 fields, found {}", f.len())));
            }
            let kind: EdgeKind = f[0].parse().map_err(|_| Error::format(ln, "bad edge kind"))?;
            let num = |s: &str| s.parse::<i64>().map_err(|_| Error::format(ln, format!("bad integer `{s}`")));
            let node = |t: i64, s: i64| -> Result<usize> {
                if t == -1 && s == -1 {
                    return Ok((r + 1) * n);
                }
                if t < 0 || s < 1 || t as usize > r || s as usize > n {
                    return Err(Error::format(ln, format!("node ({t},{s}) out of range")));
                }
                Ok(t as usize * n + s as usize - 1)
            };
            let a = node(num(f[1])?, num(f[2])?)?;
            let b = node(num(f[3])?, num(f[4])?)?;
            let real = |s: &str| s.parse::<f64>().map_err(|_| Error::format(ln, format!("bad number `{s}`")));
            let correction = if f[7].is_empty() {
                Vec::new()
            } else {
                f[7].split(';')
                    .map(|q| q.parse::<usize>().map_err(|_| Error::format(ln, "bad correction qubit")))
                    .collect::<Result<_>>()?
            };
            edges.push(Edge {
                a,
                b,
                kind,
                p: real(f[5])?,
                w: real(f[6])?,
                correction,
            });
        }
        let (Some(r), Some(n)) = (rounds, n_synd) else {
            return Err(Error::format(1, "missing `# rounds=.. n_synd=..` header"));
        };
        Self::from_edges(r, n, edges)
    }
}

/// Detector footprints of every elementary fault of a noisy program, merged by
/// footprint: `(syndrome nodes, combined probability)`. Undetectable faults are dropped.
pub fn enumerate_mechanisms(
    circ: &CircuitProgram,
    shape: &RecordShape,
) -> Result<Vec<(Vec<usize>, f64)>> {
    if circ.num_measurements() != shape.num_measurements() {
        return Err(Error::Contract(format!(
            "program records {} bits, shape expects {}",
            circ.num_measurements(),
            shape.num_measurements()
        )));
    }
    let mut injections = Vec::new();
    let mut probs = Vec::new();
    let pairs: Vec<(Pauli, Pauli)> = Pauli::two_qubit_non_identity().collect();
    for (pos, ins) in circ.instructions().iter().enumerate() {
        match *ins {
            Instruction::Depol1(p, q) if p > 0.0 => {
                for pauli in Pauli::NON_IDENTITY {
                    injections.push(FaultInjection { position: pos, paulis: vec![(q, pauli)] });
                    probs.push(p / 3.0);
                }
            }
            Instruction::Depol2(p, a, b) if p > 0.0 => {
                for &(pa, pb) in &pairs {
                    let paulis = [(a, pa), (b, pb)]
                        .into_iter()
                        .filter(|(_, p)| *p != Pauli::I)
                        .collect();
                    injections.push(FaultInjection { position: pos, paulis });
                    probs.push(p / 15.0);
                }
            }
            Instruction::XErr(p, q) if p > 0.0 => {
                injections.push(FaultInjection { position: pos, paulis: vec![(q, Pauli::X)] });
                probs.push(p);
            }
            _ => {}
        }
    }
    let flips = trace_batch(circ, &injections)?;
    let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (f, p) in flips.iter().zip(probs) {
        let det: Vec<usize> = syndrome_flips(shape, f).iter_ones().collect();
        if det.is_empty() {
            continue;
        }
        let slot = merged.entry(det).or_insert(0.0);
        *slot = combine(*slot, p);
    }
    Ok(merged.into_iter().collect())
}

/// Largest edge multiset tried when splitting a fault with a wide footprint.
pub const MAX_DECOMPOSITION: usize = 3;

/// Node pairs of the graph for `(layout, R)`: every S, T and boundary pair,
/// plus each diagonal some elementary fault actually produces.
fn topology(layout: &CodeLayout, rounds: usize) -> Result<MatchingGraph> {
    let shape = RecordShape::new(layout, rounds);
    let n = shape.n_synd();
    let nodes = shape.num_nodes();
    let state = LogicalState::states_for(layout.basis())[0];
    let ideal = build_memory_experiment(layout, rounds, state)?;
    let total = layout.total_qubits();
    let line = HeavyHexGraph::from_edges((1..total).map(|q| (q - 1, q)))?;
    let unit = QubitCalibration {
        id: 0,
        sx_error: 1e-3,
        x_error: 1e-3,
        readout_error: 1e-3,
        reset_error: Some(1e-3),
        idle_error: 1e-3,
    };
    let calib = CalibrationModel::uniform(&line, &unit, 1e-3);
    let mapping: Vec<usize> = (0..total).collect();
    let noisy = attach_noise(&ideal, &calib, &mapping)?;
    let mut pairs = BTreeSet::new();
    for t in 0..=rounds {
        for s in 0..n {
            let v = t * n + s;
            if s + 1 < n {
                pairs.insert((v, v + 1));
            }
            if t < rounds {
                pairs.insert((v, v + n));
            }
        }
        pairs.insert((t * n, nodes));
        pairs.insert((t * n + n - 1, nodes));
    }
    let mechanisms = enumerate_mechanisms(&noisy, &shape)?;
    for (det, _) in &mechanisms {
        if let [a, b] = det[..] {
            if classify(n, a, b) == Some(EdgeKind::ST) {
                pairs.insert((a, b));
            }
        }
    }
    MatchingGraph::from_pairs(rounds, n, &pairs)
}

/// Graph for `(layout, R)` with every probability zero; the shared topology of
/// both weighting backends.
pub fn graph_topology(layout: &CodeLayout, rounds: usize) -> Result<MatchingGraph> {
    if rounds == 0 {
        return Err(Error::Parameter("at least one round is required".into()));
    }
    topology(layout, rounds)
}

/// Weights from the fault model of `noisy`: each fault's probability is added
/// to the edge its footprint names, or split over a decomposition.
pub fn build_hardware_graph(
    noisy: &CircuitProgram,
    layout: &CodeLayout,
    rounds: usize,
) -> Result<MatchingGraph> {
    let mut g = graph_topology(layout, rounds)?;
    let shape = RecordShape::new(layout, rounds);
    let mut probs = vec![0.0; g.edges.len()];
    for (det, p) in enumerate_mechanisms(noisy, &shape)? {
        let parts = g.decompose(&det, MAX_DECOMPOSITION).ok_or_else(|| {
            let coords: Vec<String> = det
                .iter()
                .map(|&v| format!("({},{})", v / shape.n_synd(), v % shape.n_synd()))
                .collect();
            Error::Model(format!(
                "fault with defects {} cannot be split into {MAX_DECOMPOSITION} graph edges",
                coords.join(" ")
            ))
        })?;
        for k in parts {
            probs[k] = combine(probs[k], p);
        }
    }
    for (k, p) in probs.into_iter().enumerate() {
        g.set_probability(k, p);
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleGraph {
    pub graph: MatchingGraph,
    /// Edges whose estimator denominator was not positive.
    pub degenerate_edges: usize,
}

/// Weights estimated from syndrome correlations. Boundary probabilities solve
/// `⟨x_i⟩ = combine(p_boundary, p_ij over i's other edges)`.
pub fn build_sample_graph(
    arrays: &[SyndromeArray],
    layout: &CodeLayout,
    rounds: usize,
) -> Result<SampleGraph> {
    if arrays.len() < 2 {
        return Err(Error::Parameter(format!(
            "sample weighting needs at least 2 shots, got {}",
            arrays.len()
        )));
    }
    let mut g = graph_topology(layout, rounds)?;
    let moments = SampleMoments::new(arrays)?;
    if moments.num_nodes() != g.num_nodes() {
        return Err(Error::Contract(format!(
            "samples have {} syndrome bits, graph has {} nodes",
            moments.num_nodes(),
            g.num_nodes()
        )));
    }
    let boundary = g.boundary_node();
    let mut degenerate = 0;
    for k in 0..g.edges.len() {
        let e = &g.edges[k];
        if e.b == boundary {
            continue;
        }
        let est = moments.pair(e.a, e.b);
        degenerate += usize::from(est.degenerate);
        g.set_probability(k, est.p);
    }
    for k in 0..g.edges.len() {
        let e = &g.edges[k];
        if e.b != boundary {
            continue;
        }
        let i = e.a;
        let q = g.adjacency[i]
            .iter()
            .filter(|&&(_, j)| j != k)
            .fold(0.0, |acc, &(_, j)| combine(acc, g.edges[j].p));
        let den = 1.0 - 2.0 * q;
        let p = if den <= 0.0 {
            degenerate += 1;
            0.0
        } else {
            (moments.mean(i) - q) / den
        };
        g.set_probability(k, p);
    }
    Ok(SampleGraph {
        graph: g,
        degenerate_edges: degenerate,
    })
}

/// Mean weight per non-boundary kind; kinds without edges are absent.
pub fn edge_weight_summary(g: &MatchingGraph) -> BTreeMap<EdgeKind, f64> {
    let mut acc: BTreeMap<EdgeKind, (f64, usize)> = BTreeMap::new();
    for e in g.edges.iter().filter(|e| e.kind != EdgeKind::Boundary) {
        let slot = acc.entry(e.kind).or_default();
        slot.0 += e.w;
        slot.1 += 1;
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_layout, Basis};

    #[test]
    fn node_labels() {
        assert_eq!(node_index(1, 1, 9, 10, NodeOrder::SpaceTime).unwrap(), 1);
        assert_eq!(node_index(2, 3, 9, 10, NodeOrder::SpaceTime).unwrap(), 11);
        assert_eq!(node_index(2, 3, 9, 10, NodeOrder::TimeSpace).unwrap(), 24);
        assert!(node_index(0, 1, 9, 10, NodeOrder::SpaceTime).is_err());
        assert!(node_index(1, 9, 9, 10, NodeOrder::SpaceTime).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(weight_from_probability(0.5), 0.0);
        assert!((weight_from_probability(0.1) - 9f64.ln()).abs() < 1e-12);
        let wmax = ((1.0 - P_MIN) / P_MIN).ln();
        assert_eq!(weight_from_probability(0.0), wmax);
        assert_eq!(weight_from_probability(0.9), 0.0);
    }

    #[test]
    fn xor_combination() {
        assert!((combine(0.1, 0.1) - 0.18).abs() < 1e-15);
        assert_eq!(combine(0.5, 0.3), 0.5);
    }

    #[test]
    fn estimator_edge_cases() {
        assert_eq!(pair_probability(0.0, 0.0, 0.0).p, 0.0);
        for p in [0.01, 0.05, 0.1, 0.2] {
            assert!((pair_probability(p, p, p).p - p).abs() <= 1e-12);
        }
        assert!(pair_probability(0.5, 0.5, 0.0).degenerate);
        assert_eq!(pair_probability(0.2, 0.3, 0.06).p, 0.0);
    }

    #[test]
    fn topology_has_all_kinds_and_is_state_free() {
        let l = build_layout(5, 1, Basis::Z).unwrap();
        let g = graph_topology(&l, 3).unwrap();
        let kinds: BTreeSet<_> = g.edges().iter().map(|e| e.kind).collect();
        assert_eq!(kinds.len(), 4);
        for e in g.edges() {
            match e.kind {
                EdgeKind::T => assert!(e.correction.is_empty()),
                _ => assert_eq!(e.correction.len(), 1),
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let l = build_layout(3, 0, Basis::Z).unwrap();
        let mut g = graph_topology(&l, 2).unwrap();
        for k in 0..g.edges.len() {
            g.set_probability(k, 0.01 * (k + 1) as f64 / 7.0);
        }
        let back = MatchingGraph::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back, g);
        assert!(MatchingGraph::from_csv("kind,t1\nS,0,1,0,2,0.1,1,1\n").is_err());
    }

    #[test]
    fn decomposition_prefers_fewest_edges() {
        let l = build_layout(5, 0, Basis::Z).unwrap();
        let g = graph_topology(&l, 3).unwrap();
        let a = g.node(1, 1);
        let b = g.node(1, 2);
        assert_eq!(g.decompose(&[a, b], 3).unwrap(), vec![g.find_edge(a, b).unwrap()]);
        let far = [g.node(0, 0), g.node(0, 3)];
        assert_eq!(g.decompose(&far, 3).unwrap().len(), 2);
        assert!(g.decompose(&[g.node(0, 1), g.node(3, 2)], 2).is_none());
    }
}
