//! Exhaustive references for shortest paths and matchings.

use flagrep_core::decoder::integer_weight;
use flagrep_core::graph::MatchingGraph;

/// All-pairs integer distances over syndrome nodes plus the boundary, never
/// routing through the boundary.
pub fn floyd_warshall(g: &MatchingGraph) -> Vec<Vec<Option<i64>>> {
    let n = g.num_nodes() + 1;
    let b = g.boundary_node();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in g.edges() {
        let w = integer_weight(e.w);
        for (u, v) in [(e.a, e.b), (e.b, e.a)] {
            if d[u][v].is_none_or(|old| w < old) {
                d[u][v] = Some(w);
            }
        }
    }
    for k in (0..n).filter(|&k| k != b) {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].is_none_or(|old| ik + kj < old) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Minimum cost of pairing every item with another item or with the boundary.
pub fn min_pairing(pair: &[Vec<Option<i64>>], boundary: &[Option<i64>]) -> Option<i64> {
    fn go(left: &mut Vec<usize>, pair: &[Vec<Option<i64>>], boundary: &[Option<i64>]) -> Option<i64> {
        let Some(i) = left.pop() else { return Some(0) };
        let mut best: Option<i64> = None;
        if let Some(b) = boundary[i] {
            if let Some(rest) = go(left, pair, boundary) {
                best = Some(b + rest);
            }
        }
        for k in 0..left.len() {
            let j = left[k];
            let Some(w) = pair[i][j] else { continue };
            left.swap_remove(k);
            if let Some(rest) = go(left, pair, boundary) {
                best = Some(best.map_or(w + rest, |b| b.min(w + rest)));
            }
            left.push(j);
            let last = left.len() - 1;
            left.swap(k, last);
        }
        left.push(i);
        best
    }
    let mut left: Vec<usize> = (0..boundary.len()).collect();
    go(&mut left, pair, boundary)
}

/// Minimum weight perfect matching cost of a small graph by enumeration.
pub fn min_perfect_matching(n: usize, edges: &[(usize, usize, i64)]) -> Option<i64> {
    let mut w = vec![vec![None; n]; n];
    for &(u, v, c) in edges {
        let cur: &mut Option<i64> = &mut w[u][v];
        if cur.is_none_or(|old| c < old) {
            *cur = Some(c);
            w[v][u] = Some(c);
        }
    }
    let none = vec![None; n];
    if n % 2 == 1 {
        return None;
    }
    // pairing without a boundary option
    min_pairing(&w, &none)
}
