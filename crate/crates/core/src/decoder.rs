//! Minimum-weight perfect matching decoder.
//!
//! Edge weights are rounded to integers (`w · WEIGHT_SCALE`) before any path
//! or matching computation, so matchings are exact over the rounded weights.

use crate::bits::BitVec;
use crate::blossom::min_weight_perfect_matching;
use crate::error::{Error, Result};
use crate::graph::MatchingGraph;
use crate::layout::LogicalState;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::fmt::Write as _;

pub const WEIGHT_SCALE: f64 = (1u64 << 20) as f64;

pub fn integer_weight(w: f64) -> i64 {
    (w * WEIGHT_SCALE).round() as i64
}

/// Single-source shortest paths from each source; the boundary node is a sink.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    sources: Vec<usize>,
    dist: Vec<Vec<Option<i64>>>,
    pred: Vec<Vec<Option<(usize, usize)>>>,
}

impl ShortestPaths {
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// Integer distance from source `i` (by position) to `node`.
    pub fn int_distance(&self, i: usize, node: usize) -> Option<i64> {
        self.dist[i][node]
    }

    pub fn distance(&self, i: usize, node: usize) -> Option<f64> {
        self.dist[i][node].map(|d| d as f64 / WEIGHT_SCALE)
    }

    /// Edge indices from source `i` to `node`, in path order.
    pub fn path(&self, i: usize, node: usize) -> Option<Vec<usize>> {
        self.dist[i][node]?;
        let mut edges = Vec::new();
        let mut cur = node;
        while let Some((prev, e)) = self.pred[i][cur] {
            edges.push(e);
            cur = prev;
        }
        edges.reverse();
        Some(edges)
    }
}

pub fn shortest_paths(g: &MatchingGraph, sources: &[usize]) -> Result<ShortestPaths> {
    let weights: Vec<i64> = g.edges().iter().map(|e| integer_weight(e.w)).collect();
    shortest_paths_with(g, &weights, sources)
}

fn shortest_paths_with(g: &MatchingGraph, weights: &[i64], sources: &[usize]) -> Result<ShortestPaths> {
    let total = g.num_nodes() + 1;
    let boundary = g.boundary_node();
    let mut dist = Vec::with_capacity(sources.len());
    let mut pred = Vec::with_capacity(sources.len());
    for &src in sources {
        if src >= g.num_nodes() {
            return Err(Error::Contract(format!("source {src} is not a syndrome node")));
        }
        let mut d: Vec<Option<i64>> = vec![None; total];
        let mut p: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut done = vec![false; total];
        let mut heap = BinaryHeap::new();
        d[src] = Some(0);
        heap.push(Reverse((0i64, src)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == boundary {
                continue;
            }
            for &(v, k) in g.neighbors(u) {
                let nd = du + weights[k];
                if d[v].is_none_or(|old| nd < old) {
                    d[v] = Some(nd);
                    p[v] = Some((u, k));
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist.push(d);
        pred.push(p);
    }
    Ok(ShortestPaths {
        sources: sources.to_vec(),
        dist,
        pred,
    })
}

/// Defects plus one boundary partner per defect. Node `i < k` is defect `i`,
/// node `k + i` its partner.
#[derive(Clone, Debug)]
pub struct DefectGraph {
    pub paths: ShortestPaths,
    /// `(u, v, integer weight)` over the `2k` nodes.
    pub edges: Vec<(usize, usize, i64)>,
}

impl DefectGraph {
    pub fn new(g: &MatchingGraph, defects: &[usize]) -> Result<Self> {
        let weights: Vec<i64> = g.edges().iter().map(|e| integer_weight(e.w)).collect();
        Self::with_weights(g, &weights, defects)
    }

    fn with_weights(g: &MatchingGraph, weights: &[i64], defects: &[usize]) -> Result<Self> {
        let paths = shortest_paths_with(g, weights, defects)?;
        let k = defects.len();
        let boundary = g.boundary_node();
        let mut edges = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in i + 1..k {
                if let Some(w) = paths.int_distance(i, defects[j]) {
                    edges.push((i, j, w));
                }
            }
            if let Some(w) = paths.int_distance(i, boundary) {
                edges.push((i, k + i, w));
            }
            for j in i + 1..k {
                edges.push((k + i, k + j, 0));
            }
        }
        Ok(Self { paths, edges })
    }

    pub fn num_defects(&self) -> usize {
        self.paths.sources.len()
    }
}

/// A matched pair: two defects (by position), or a defect and the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pairing {
    Defects(usize, usize),
    Boundary(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<Pairing>,
    pub total_weight: i64,
}

pub fn match_defects(dg: &DefectGraph) -> Result<Matching> {
    let k = dg.num_defects();
    if k == 0 {
        return Ok(Matching { pairs: Vec::new(), total_weight: 0 });
    }
    let mut edges = dg.edges.clone();
    edges.sort_unstable();
    let mate = min_weight_perfect_matching(2 * k, &edges)
        .ok_or_else(|| Error::Contract("defects cannot all be paired; graph disconnected".into()))?;
    let mut pairs = Vec::new();
    let mut total = 0;
    for i in 0..k {
        let m = mate[i];
        if m == k + i {
            pairs.push(Pairing::Boundary(i));
        } else if m < k && i < m {
            pairs.push(Pairing::Defects(i, m));
        }
    }
    for &(u, v, w) in &edges {
        if mate[u] == v {
            total += w;
        }
    }
    Ok(Matching { pairs, total_weight: total })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    NonDetected,
    Corrected,
    NonCorrected,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::NonDetected, Category::Corrected, Category::NonCorrected];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::NonDetected => "non-detected",
            Category::Corrected => "corrected",
            Category::NonCorrected => "non-corrected",
        })
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "non-detected" => Category::NonDetected,
            "corrected" => Category::Corrected,
            "non-corrected" => Category::NonCorrected,
            _ => return Err(Error::Parameter(format!("unknown category `{s}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub corrected: BitVec,
    pub failure: bool,
    pub category: Category,
}

/// Decoder bound to one graph; reusable across shots and threads.
#[derive(Clone, Debug)]
pub struct Decoder<'g> {
    graph: &'g MatchingGraph,
    weights: Vec<i64>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        let weights = graph.edges().iter().map(|e| integer_weight(e.w)).collect();
        Self { graph, weights }
    }

    pub fn graph(&self) -> &MatchingGraph {
        self.graph
    }

    /// Data-qubit flips implied by matching `defects`.
    pub fn correction(&self, defects: &[usize], distance: usize) -> Result<BitVec> {
        let dg = DefectGraph::with_weights(self.graph, &self.weights, defects)?;
        let m = match_defects(&dg)?;
        let mut corr = BitVec::zeros(distance);
        let boundary = self.graph.boundary_node();
        for pair in m.pairs {
            let (i, target) = match pair {
                Pairing::Defects(i, j) => (i, defects[j]),
                Pairing::Boundary(i) => (i, boundary),
            };
            for e in dg.paths.path(i, target).expect("matched pairs are connected") {
                for &q in &self.graph.edges()[e].correction {
                    if q >= distance {
                        return Err(Error::Contract(format!(
                            "edge correction names data qubit {q} of {distance}"
                        )));
                    }
                    corr.toggle(q);
                }
            }
        }
        Ok(corr)
    }

    pub fn decode(
        &self,
        defects: &[(usize, usize)],
        measured_data: &BitVec,
        state: LogicalState,
    ) -> Result<DecodeOutcome> {
        let d = measured_data.len();
        if d != self.graph.n_synd() + 1 {
            return Err(Error::Contract(format!(
                "{d} data bits for a graph with {} syndromes",
                self.graph.n_synd()
            )));
        }
        let nodes: Vec<usize> = defects
            .iter()
            .map(|&(t, s)| {
                if t > self.graph.rounds() || s >= self.graph.n_synd() {
                    Err(Error::Contract(format!("defect ({t},{s}) outside the graph")))
                } else {
                    Ok(self.graph.node(t, s))
                }
            })
            .collect::<Result<_>>()?;
        let mut corrected = measured_data.clone();
        corrected.xor_assign(&self.correction(&nodes, d)?);
        if let Some(i) = (0..d - 1).find(|&i| corrected.get(i) != corrected.get(i + 1)) {
            return Err(Error::Consistency(format!(
                "corrected data violates stabilizer {i}: {:?}",
                corrected
            )));
        }
        let failure = corrected.get(0) != state.codeword_bit();
        let category = if failure {
            Category::NonCorrected
        } else if defects.is_empty() {
            Category::NonDetected
        } else {
            Category::Corrected
        };
        Ok(DecodeOutcome {
            corrected,
            failure,
            category,
        })
    }
}

pub fn decode_shot(
    g: &MatchingGraph,
    defects: &[(usize, usize)],
    measured_data: &BitVec,
    state: LogicalState,
) -> Result<DecodeOutcome> {
    Decoder::new(g).decode(defects, measured_data, state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeRow {
    pub shot: usize,
    pub defect_count: usize,
    pub category: Category,
    pub failure: bool,
}

pub fn write_results_csv(rows: &[DecodeRow]) -> String {
    let mut s = String::from("shot,defect_count,category,failure\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.shot, r.defect_count, r.category, u8::from(r.failure)).unwrap();
    }
    s
}

pub fn read_results_csv(text: &str) -> Result<Vec<DecodeRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "shot,defect_count,category,failure" {
                return Err(Error::format(1, "unexpected results header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::format(i + 1, "malformed results row");
        if f.len() != 4 {
            return Err(bad());
        }
        rows.push(DecodeRow {
            shot: f[0].parse().map_err(|_| bad())?,
            defect_count: f[1].parse().map_err(|_| bad())?,
            category: f[2].parse().map_err(|_| bad())?,
            failure: match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            },
        });
    }
    Ok(rows)
}
