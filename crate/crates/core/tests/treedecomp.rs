mod common;

use proptest::prelude::*;
use tw_congest::graph::validate_tree_decomposition;
use tw_congest::separator::SepConfig;
use tw_congest::sim::SimConfig;
use tw_congest::treedecomp::build_tree_decomposition;

use common::ktree;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_valid_within_bounds(
        n in 1usize..250,
        k in 1usize..4,
        seed in any::<u64>(),
        desk in any::<bool>(),
        directed in any::<bool>(),
    ) {
        let cfg = if desk { SepConfig::desk() } else { SepConfig::paper() };
        let g = ktree(n, k.min(n.saturating_sub(1)).max(1), 0.7, 5, seed, directed).graph;
        let out = build_tree_decomposition(&g, &cfg, seed, &SimConfig::default()).unwrap();
        let r = validate_tree_decomposition(&g, &out.td);
        prop_assert!(r.valid, "{:?}", r.violations);
        prop_assert_eq!(r.width, out.width);
        prop_assert_eq!(r.depth, out.depth);
        prop_assert!(out.depth_ok(), "depth {} > {}", out.depth, out.depth_bound);
        prop_assert!(out.width_ok(), "width {} > {}", out.width, out.width_bound);
    }
}

#[test]
fn desk_recursion_goes_deep() {
    let g = ktree(400, 2, 0.7, 1, 1, false).graph;
    let out = build_tree_decomposition(&g, &SepConfig::desk(), 1, &SimConfig::default()).unwrap();
    assert!(out.depth >= 2);
    assert!(validate_tree_decomposition(&g, &out.td).valid);
    assert_eq!(out.levels.len(), out.depth + 1);
}

#[test]
fn deterministic_per_seed() {
    let g = ktree(200, 3, 0.7, 1, 9, true).graph;
    let a = build_tree_decomposition(&g, &SepConfig::desk(), 5, &SimConfig::default()).unwrap();
    let b = build_tree_decomposition(&g, &SepConfig::desk(), 5, &SimConfig::default()).unwrap();
    assert_eq!(a.td, b.td);
    assert_eq!(a.stats, b.stats);
}
