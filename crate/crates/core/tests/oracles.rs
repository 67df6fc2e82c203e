mod common;

use proptest::prelude::*;
use tw_congest::graph::{dist_add, CommGraph, MultiGraph, INF};
use tw_congest::oracles::{oracle_apsp, oracle_girth, oracle_matching, oracle_min_vertex_cut, oracle_min_vertex_cut_size};

use common::{arb_graph, bipartite_ktree, ktree};

/// Largest matching by trying every edge subset.
fn brute_matching(g: &MultiGraph) -> usize {
    let m = g.m();
    let mut best = 0;
    for mask in 0u32..(1 << m) {
        let mut used = vec![false; g.n()];
        let mut ok = true;
        for e in 0..m {
            if mask >> e & 1 == 1 {
                let ed = g.edge(e);
                if used[ed.u] || used[ed.v] {
                    ok = false;
                    break;
                }
                used[ed.u] = true;
                used[ed.v] = true;
            }
        }
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Shortest cycle through each edge: its cost plus the distance back,
/// with the edge itself removed when undirected.
fn girth_by_edges(g: &MultiGraph) -> u64 {
    let mut best = INF;
    for e in 0..g.m() {
        let ed = g.edge(e);
        let rest: Vec<(usize, usize, u64)> = if g.is_directed() {
            g.edges().iter().map(|x| (x.u, x.v, x.cost)).collect()
        } else {
            g.edges().iter().enumerate().filter(|&(i, _)| i != e).map(|(_, x)| (x.u, x.v, x.cost)).collect()
        };
        let d = oracle_apsp(&MultiGraph::from_pairs(g.n(), g.is_directed(), &rest));
        best = best.min(dist_add(ed.cost, d[ed.v][ed.u]));
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn apsp_triangle_inequality(g in arb_graph(8, 20, 10)) {
        let d = oracle_apsp(&g);
        for e in g.edges() {
            prop_assert!(d[e.u][e.v] <= e.cost);
            if !g.is_directed() {
                prop_assert_eq!(d[e.u][e.v], d[e.v][e.u]);
            }
        }
        for a in 0..g.n() {
            prop_assert_eq!(d[a][a], 0);
            for b in 0..g.n() {
                for c in 0..g.n() {
                    prop_assert!(d[a][c] <= dist_add(d[a][b], d[b][c]));
                }
            }
        }
    }

    #[test]
    fn girth_matches_edge_scan(g in arb_graph(7, 12, 10)) {
        prop_assert_eq!(oracle_girth(&g), girth_by_edges(&g));
    }

    #[test]
    fn matching_matches_brute_force(n in 2usize..10, seed in any::<u64>()) {
        let g = bipartite_ktree(n, 2.min(n - 1), 0.8, seed).graph;
        prop_assume!(g.m() <= 16);
        let mm = oracle_matching(&g);
        prop_assert_eq!(mm.len(), brute_matching(&g));
        let mut used = vec![false; n];
        for &(a, b) in &mm {
            prop_assert!(!used[a] && !used[b]);
            used[a] = true;
            used[b] = true;
        }
    }

    #[test]
    fn cut_search_agrees_with_flow(n in 3usize..12, seed in any::<u64>(), xm in any::<u16>(), ym in any::<u16>()) {
        let c: CommGraph = ktree(n, 2, 0.7, 1, seed, false).graph.comm_graph();
        let xs: Vec<usize> = (0..n).filter(|&v| xm >> v & 1 == 1).collect();
        let ys: Vec<usize> = (0..n).filter(|&v| ym >> v & 1 == 1 && xm >> v & 1 == 0).collect();
        prop_assert_eq!(oracle_min_vertex_cut(&c, &xs, &ys).map(|s| s.len()), oracle_min_vertex_cut_size(&c, &xs, &ys));
    }
}
