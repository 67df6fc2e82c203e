mod common;

use proptest::prelude::*;
use tw_congest::graph::{MultiGraph, TreeDecomposition, INF};
use tw_congest::oracles::oracle_constrained_walks;
use tw_congest::sim::{run, Flood, SimConfig};
use tw_congest::walks::{
    build_product_graph, cdl_build, cdl_decode, colored, constrained_distance, extract_with, run_on_product,
    StatefulConstraint, BOTTOM_NAME, START_NAME,
};

use common::{arb_graph, ktree};

/// `regular` ordinary states, then the reject and initial states, with
/// transitions drawn from `choice`.
fn random_constraint(m: usize, regular: usize, choice: &[u32]) -> StatefulConstraint {
    let q = regular + 2;
    let mut names: Vec<String> = (0..regular).map(|i| format!("s{}", i)).collect();
    names.push(BOTTOM_NAME.into());
    names.push(START_NAME.into());
    let delta = (0..m)
        .map(|e| {
            (0..q)
                .map(|i| if i == regular { regular as u32 } else { choice[(e * q + i) % choice.len()] % (regular as u32 + 1) })
                .collect()
        })
        .collect();
    StatefulConstraint::new(names, delta).unwrap()
}

fn arb_case() -> impl Strategy<Value = (MultiGraph, StatefulConstraint)> {
    (arb_graph(6, 12, 9), 1usize..4, prop::collection::vec(any::<u32>(), 1..64))
        .prop_map(|(g, r, ch)| {
            let c = random_constraint(g.m(), r, &ch);
            (g, c)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Product distances from the initial copy equal shortest constrained
    /// walks, for every non-reject state.
    #[test]
    fn product_distance_is_constrained_walk((g, c) in arb_case()) {
        let q = c.num_states();
        let max_len = g.n() * q;
        let oracle = oracle_constrained_walks(&g, q, c.start(), &|s, e| c.step(e, s), max_len);
        for s in 0..g.n() {
            for t in 0..g.n() {
                for st in 0..q {
                    if st == c.bottom() {
                        continue;
                    }
                    prop_assert_eq!(constrained_distance(&g, &c, s, t, st).unwrap(), oracle[s][t][st], "s={} t={} q={}", s, t, st);
                }
            }
        }
    }

    #[test]
    fn constrained_labels_exact((g, c) in arb_case()) {
        let cdl = cdl_build(&g, &c, &TreeDecomposition::single_bag(g.n()), &SimConfig::default()).unwrap();
        for s in 0..g.n() {
            for t in 0..g.n() {
                for st in 0..c.num_states() {
                    if st == c.bottom() {
                        continue;
                    }
                    prop_assert_eq!(
                        cdl_decode(st, &cdl.labels[s], &cdl.labels[t]).unwrap(),
                        constrained_distance(&g, &c, s, t, st).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn extracted_walk_is_valid((g, c) in arb_case(), s in any::<prop::sample::Index>(), t in any::<prop::sample::Index>()) {
        let (s, t) = (s.index(g.n()), t.index(g.n()));
        let cdl = cdl_build(&g, &c, &TreeDecomposition::single_bag(g.n()), &SimConfig::default()).unwrap();
        for q in 0..c.num_states() {
            if q == c.bottom() {
                continue;
            }
            let want = constrained_distance(&g, &c, s, t, q).unwrap();
            match extract_with(&g, &c, &cdl, s, t, q, &SimConfig::default()) {
                Ok((w, _)) => {
                    prop_assert!(want < INF);
                    prop_assert_eq!(w.vertices.first().copied(), Some(s));
                    prop_assert_eq!(w.vertices.last().copied(), Some(t));
                    prop_assert_eq!(w.vertices.len(), w.edges.len() + 1);
                    let mut cost = 0;
                    for (i, &e) in w.edges.iter().enumerate() {
                        let ed = g.edge(e);
                        let (a, b) = (w.vertices[i], w.vertices[i + 1]);
                        prop_assert!((ed.u == a && ed.v == b) || (!g.is_directed() && ed.u == b && ed.v == a));
                        cost += ed.cost;
                    }
                    prop_assert_eq!(c.fold(&w.edges), q);
                    prop_assert_eq!(cost, want);
                    prop_assert_eq!(w.weight, want);
                }
                Err(_) => prop_assert_eq!(want, INF),
            }
        }
    }

    #[test]
    fn hosted_run_matches_materialized((g, c) in arb_case(), s in any::<prop::sample::Index>()) {
        let pg = build_product_graph(&g, &c).unwrap();
        let mut sources = vec![false; pg.graph.n()];
        sources[pg.node(s.index(g.n()), c.start())] = true;
        let prog = Flood { sources };
        let direct = run(&pg.graph.comm_graph(), &prog, "flood", &SimConfig::default()).unwrap();
        let hosted = run_on_product(&g, &c, &prog, "flood", &SimConfig::default()).unwrap();
        prop_assert_eq!(direct.0, hosted.outputs);
        prop_assert!(hosted.cost.serialization <= hosted.cost.bound);
    }

    /// Every copy is one hop from its reject copy, and the reject layer is a
    /// copy of the network.
    #[test]
    fn product_diameter_at_most_plus_two(n in 2usize..40, k in 1usize..3, seed in any::<u64>(), ch in prop::collection::vec(any::<u32>(), 1..32)) {
        let g = ktree(n, k.min(n - 1), 0.7, 3, seed, seed % 2 == 0).graph;
        let c = random_constraint(g.m(), 2, &ch);
        let d = g.comm_graph().diameter().unwrap();
        let pd = build_product_graph(&g, &c).unwrap().graph.comm_graph().diameter().unwrap();
        prop_assert!(pd <= d + 2, "{} > {} + 2", pd, d);
    }
}

#[test]
fn cdl_over_built_decomposition() {
    use tw_congest::separator::SepConfig;
    use tw_congest::treedecomp::build_tree_decomposition;
    let g = ktree(60, 2, 0.8, 10, 3, false).graph;
    let color: Vec<usize> = (0..g.m()).map(|e| e % 3).collect();
    let c = colored(&g, 3, &color).unwrap();
    let td = build_tree_decomposition(&g, &SepConfig::desk(), 3, &SimConfig::default()).unwrap().td;
    let cdl = cdl_build(&g, &c, &td, &SimConfig::default()).unwrap();
    assert!(cdl.cost.serialization <= cdl.cost.bound);
    for s in [0, 7, 59] {
        for t in 0..g.n() {
            for q in 0..3 {
                assert_eq!(cdl_decode(q, &cdl.labels[s], &cdl.labels[t]).unwrap(), constrained_distance(&g, &c, s, t, q).unwrap());
            }
        }
    }
}
