mod common;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use proptest::prelude::*;
use tw_congest::graph::{dist_add, TreeDecomposition, VertexId, INF};
use tw_congest::labels::{build_labels, decode, sssp_from};
use tw_congest::oracles::oracle_apsp;
use tw_congest::separator::SepConfig;
use tw_congest::sim::SimConfig;
use tw_congest::treedecomp::build_tree_decomposition;

use common::{arb_graph, arb_ktree, ktree};

fn dijkstra(arcs: &[(VertexId, VertexId, u64)], s: VertexId) -> HashMap<VertexId, u64> {
    let mut adj: HashMap<VertexId, Vec<(VertexId, u64)>> = HashMap::new();
    for &(a, b, c) in arcs {
        adj.entry(a).or_default().push((b, c));
    }
    let mut dist = HashMap::from([(s, 0u64)]);
    let mut pq = BinaryHeap::from([Reverse((0u64, s))]);
    while let Some(Reverse((d, u))) = pq.pop() {
        if dist.get(&u).is_some_and(|&x| x < d) {
            continue;
        }
        for &(w, c) in adj.get(&u).map(|v| v.as_slice()).unwrap_or(&[]) {
            let nd = dist_add(d, c);
            if nd < *dist.get(&w).unwrap_or(&INF) {
                dist.insert(w, nd);
                pq.push(Reverse((nd, w)));
            }
        }
    }
    dist
}

fn check_exact(g: &tw_congest::graph::MultiGraph, td: &TreeDecomposition) -> Result<(), TestCaseError> {
    let dl = build_labels(g, td, &SimConfig::default()).unwrap();
    let apsp = oracle_apsp(g);
    for u in 0..g.n() {
        for v in 0..g.n() {
            prop_assert_eq!(decode(&dl.labels[u], &dl.labels[v]).unwrap(), apsp[u][v], "pair {} {}", u, v);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn labels_exact_on_witness(inst in arb_ktree(60, 4, 100)) {
        check_exact(&inst.graph, &inst.witness)?;
    }

    #[test]
    fn labels_exact_on_built_decomposition(n in 2usize..120, k in 1usize..4, seed in any::<u64>()) {
        let g = ktree(n, k.min(n - 1), 0.7, 100, seed, true).graph;
        let td = build_tree_decomposition(&g, &SepConfig::desk(), seed, &SimConfig::default()).unwrap().td;
        check_exact(&g, &td)?;
    }

    #[test]
    fn labels_exact_with_single_bag(g in arb_graph(10, 25, 20)) {
        check_exact(&g, &TreeDecomposition::single_bag(g.n()))?;
    }

    /// The bag-local graph preserves the distances of `G_x` between bag
    /// vertices, and hub sets are exactly the upward bags.
    #[test]
    fn bag_local_distances_and_hubs(inst in arb_ktree(50, 3, 30)) {
        let dl = build_labels(&inst.graph, &inst.witness, &SimConfig::default()).unwrap();
        for tr in dl.trace.values() {
            for (i, &a) in tr.bag.iter().enumerate() {
                let gx = dijkstra(&tr.gx_edges, a);
                let hx = dijkstra(&tr.hx_edges, a);
                for (j, &b) in tr.bag.iter().enumerate() {
                    let want = *gx.get(&b).unwrap_or(&INF);
                    prop_assert_eq!(tr.m[i][j], want);
                    prop_assert_eq!(*hx.get(&b).unwrap_or(&INF), want);
                }
            }
        }
        let w = inst.witness.width().max(0) as usize;
        let d = inst.witness.depth();
        for (v, l) in dl.labels.iter().enumerate() {
            prop_assert_eq!(&l.hubs, &inst.witness.upward_bags(v).unwrap());
            prop_assert!(l.hubs.len() <= (w + 1) * (d + 1));
        }
    }
}

#[test]
fn sssp_matches_oracle() {
    let g = ktree(150, 3, 0.7, 50, 2, true).graph;
    let td = build_tree_decomposition(&g, &SepConfig::desk(), 2, &SimConfig::default()).unwrap().td;
    let apsp = oracle_apsp(&g);
    for s in [0, 17, 149] {
        let (d, st) = sssp_from(&g, &td, s, &SimConfig::default()).unwrap();
        assert_eq!(d, apsp[s]);
        assert!(st.rounds > 0);
    }
}

#[test]
fn construction_is_deterministic() {
    let g = ktree(120, 3, 0.7, 9, 4, true).graph;
    let td = build_tree_decomposition(&g, &SepConfig::desk(), 4, &SimConfig::default()).unwrap().td;
    let a = build_labels(&g, &td, &SimConfig::default()).unwrap();
    for _ in 0..4 {
        let b = build_labels(&g, &td, &SimConfig::default()).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.stats, b.stats);
    }
}
