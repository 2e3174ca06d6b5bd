use flagrep_core::chain::{select_chain, EdgeCosts, HeavyHexGraph};
use flagrep_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every simple path with `length` nodes, each listed once per direction.
fn all_paths(g: &HeavyHexGraph, length: usize) -> Vec<Vec<usize>> {
    fn grow(g: &HeavyHexGraph, length: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if path.len() == length {
            out.push(path.clone());
            return;
        }
        let last = *path.last().unwrap();
        let next: Vec<usize> = g.neighbors(last).filter(|n| !path.contains(n)).collect();
        for n in next {
            path.push(n);
            grow(g, length, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for s in g.nodes() {
        let mut path = vec![s];
        grow(g, length, &mut path, &mut out);
    }
    out
}

fn cost(path: &[usize], costs: &EdgeCosts) -> f64 {
    path.windows(2).map(|w| costs.get(w[0], w[1])).sum()
}

fn is_path(g: &HeavyHexGraph, path: &[usize]) -> bool {
    let mut seen = path.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == path.len() && path.windows(2).all(|w| g.has_edge(w[0], w[1]))
}

/// Center 0 with arms 1-2-3, 4-5 and the stub 6.
fn y_graph() -> HeavyHexGraph {
    HeavyHexGraph::from_edges([(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (0, 6)]).unwrap()
}

#[test]
fn y_graph_chain_avoids_expensive_stub() {
    let g = y_graph();
    let mut costs = EdgeCosts::uniform(0.01);
    costs.insert(0, 6, 0.5);
    for length in 2..=6 {
        let m = select_chain(&g, length, &costs).unwrap();
        assert!(is_path(&g, &m));
        assert!(!m.contains(&6), "length {length}: {m:?}");
    }
}

#[test]
fn y_graph_matches_exhaustive_enumeration() {
    let g = y_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let costs: EdgeCosts = g.edges().map(|e| (e, rng.gen_range(1e-3..5e-2))).collect();
        for length in 1..=6 {
            let m = select_chain(&g, length, &costs).unwrap();
            assert_eq!(m.len(), length);
            assert!(is_path(&g, &m));
            let best = all_paths(&g, length)
                .iter()
                .map(|p| cost(p, &costs))
                .fold(f64::INFINITY, f64::min);
            assert!((cost(&m, &costs) - best).abs() < 1e-15, "length {length}");
        }
    }
}

#[test]
fn y_graph_too_long_is_infeasible() {
    // longest simple path is 3-2-1-0-4-5
    let g = y_graph();
    assert!(matches!(
        select_chain(&g, 7, &EdgeCosts::uniform(1.0)),
        Err(Error::Infeasible { length: 7 })
    ));
}

#[test]
fn heavy_hex_patch_matches_exhaustive_enumeration() {
    // two hexagons sharing a side, every edge subdivided (degree <= 3)
    let g = HeavyHexGraph::from_edges([
        (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9),
        (9, 10), (10, 11), (11, 0), (3, 12), (12, 13), (13, 14), (14, 15), (15, 16),
        (16, 17), (17, 18), (18, 19), (19, 20), (20, 21), (21, 9),
    ])
    .unwrap();
    assert!(g.max_degree() <= 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let costs: EdgeCosts = g.edges().map(|e| (e, rng.gen_range(1e-3..5e-2))).collect();
        for length in [3, 7, 12] {
            let m = select_chain(&g, length, &costs).unwrap();
            assert!(is_path(&g, &m));
            let best = all_paths(&g, length)
                .iter()
                .map(|p| cost(p, &costs))
                .fold(f64::INFINITY, f64::min);
            assert!((cost(&m, &costs) - best).abs() < 1e-12, "length {length}");
        }
    }
}

#[test]
fn eagle_device_hosts_the_largest_chain() {
    let g = HeavyHexGraph::eagle127();
    // d = 9, f = 2: 8 cells of 6 plus the last data qubit
    let m = select_chain(&g, 49, &EdgeCosts::uniform(1.0)).unwrap();
    assert!(is_path(&g, &m));
}
