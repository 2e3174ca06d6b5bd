//! Coupling graphs and selection of a 1-D physical chain for a code layout.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Undirected coupling graph over physical qubit ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeavyHexGraph {
    adjacency: BTreeMap<usize, BTreeSet<usize>>,
}

impl HeavyHexGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from couplers, rejecting self-loops and nodes of degree above three.
    pub fn from_edges(edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new();
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, id: usize) {
        self.adjacency.entry(id).or_default();
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::Parameter(format!("self-coupling on qubit {a}")));
        }
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
        for q in [a, b] {
            if self.adjacency[&q].len() > 3 {
                return Err(Error::Parameter(format!(
                    "qubit {q} would have degree {} (heavy-hex allows at most 3)",
                    self.adjacency[&q].len()
                )));
            }
        }
        Ok(())
    }

    /// The 127-qubit heavy-hexagon coupling map of the Eagle processor family.
    pub fn eagle127() -> Self {
        let mut edges = Vec::new();
        // seven rows: 0..=13, 18..=32, 37..=51, 56..=70, 75..=89, 94..=108, 113..=126
        let rows: [(usize, usize); 7] = [
            (0, 13),
            (18, 32),
            (37, 51),
            (56, 70),
            (75, 89),
            (94, 108),
            (113, 126),
        ];
        for &(lo, hi) in &rows {
            edges.extend((lo..hi).map(|q| (q, q + 1)));
        }
        // bridge qubits: (upper, bridge, lower)
        let bridges: [(usize, usize, usize); 24] = [
            (0, 14, 18),
            (4, 15, 22),
            (8, 16, 26),
            (12, 17, 30),
            (20, 33, 39),
            (24, 34, 43),
            (28, 35, 47),
            (32, 36, 51),
            (37, 52, 56),
            (41, 53, 60),
            (45, 54, 64),
            (49, 55, 68),
            (58, 71, 77),
            (62, 72, 81),
            (66, 73, 85),
            (70, 74, 89),
            (75, 90, 94),
            (79, 91, 98),
            (83, 92, 102),
            (87, 93, 106),
            (96, 109, 114),
            (100, 110, 118),
            (104, 111, 122),
            (108, 112, 126),
        ];
        for &(up, b, down) in &bridges {
            edges.push((up, b));
            edges.push((b, down));
        }
        Self::from_edges(edges).expect("eagle map is a valid heavy-hex graph")
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(&a, nb)| nb.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn neighbors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.get(&q).into_iter().flatten().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(&a).is_some_and(|nb| nb.contains(&b))
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.nodes().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(q) = stack.pop() {
            for n in self.neighbors(q) {
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == self.node_count()
    }
}

/// Edge cost lookup for chain selection; unknown couplers cost `default`.
#[derive(Clone, Debug, Default)]
pub struct EdgeCosts {
    costs: BTreeMap<(usize, usize), f64>,
    default: f64,
}

impl EdgeCosts {
    pub fn uniform(cost: f64) -> Self {
        Self {
            costs: BTreeMap::new(),
            default: cost,
        }
    }

    pub fn insert(&mut self, a: usize, b: usize, cost: f64) {
        self.costs.insert((a.min(b), a.max(b)), cost);
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.costs
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(self.default)
    }
}

impl FromIterator<((usize, usize), f64)> for EdgeCosts {
    fn from_iter<T: IntoIterator<Item = ((usize, usize), f64)>>(iter: T) -> Self {
        let mut c = Self::uniform(0.0);
        for ((a, b), w) in iter {
            c.insert(a, b, w);
        }
        c
    }
}

/// Node-expansion budget for the exact search. The search keeps its best path
/// so far; exhausting the budget returns that path instead of a proven optimum.
pub const SEARCH_BUDGET: usize = 2_000_000;

/// Picks a simple path of `length` nodes minimizing the summed edge cost.
///
/// Depth-first branch and bound: start nodes in ascending id, neighbours by
/// (cost, id). Ties resolve to the first path found, so the result is
/// deterministic. Returns `mapping[chain_index] = physical_id`.
pub fn select_chain(graph: &HeavyHexGraph, length: usize, costs: &EdgeCosts) -> Result<Vec<usize>> {
    if length == 0 || length > graph.node_count() {
        return Err(Error::Infeasible { length });
    }
    if !graph.is_connected() {
        return Err(Error::Parameter("coupling graph is not connected".into()));
    }
    if length == 1 {
        return Ok(vec![graph.nodes().next().unwrap()]);
    }
    let min_edge = graph
        .edges()
        .map(|(a, b)| costs.get(a, b))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let mut search = Search {
        graph,
        costs,
        length,
        min_edge,
        best: None,
        path: Vec::with_capacity(length),
        on_path: BTreeSet::new(),
        budget: SEARCH_BUDGET,
    };
    let starts: Vec<usize> = graph.nodes().collect();
    for s in starts {
        if search.budget == 0 {
            break;
        }
        search.path.push(s);
        search.on_path.insert(s);
        search.extend(0.0);
        search.on_path.remove(&s);
        search.path.pop();
    }
    search
        .best
        .map(|(_, p)| p)
        .ok_or(Error::Infeasible { length })
}

struct Search<'a> {
    graph: &'a HeavyHexGraph,
    costs: &'a EdgeCosts,
    length: usize,
    min_edge: f64,
    best: Option<(f64, Vec<usize>)>,
    path: Vec<usize>,
    on_path: BTreeSet<usize>,
    budget: usize,
}

impl Search<'_> {
    fn extend(&mut self, cost: f64) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        if self.path.len() == self.length {
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.path.clone()));
            }
            return;
        }
        let remaining = (self.length - self.path.len()) as f64;
        if let Some((b, _)) = &self.best {
            if cost + remaining * self.min_edge >= *b {
                return;
            }
        }
        let last = *self.path.last().unwrap();
        let mut next: Vec<(f64, usize)> = self
            .graph
            .neighbors(last)
            .filter(|n| !self.on_path.contains(n))
            .map(|n| (self.costs.get(last, n), n))
            .collect();
        next.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (c, n) in next {
            self.path.push(n);
            self.on_path.insert(n);
            self.extend(cost + c);
            self.on_path.remove(&n);
            self.path.pop();
        }
    }
}
