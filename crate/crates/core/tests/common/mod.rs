#![allow(dead_code)]

use proptest::prelude::*;
use tw_congest::generate::{generate_partial_ktree_with, Instance, KTreeOptions};
use tw_congest::graph::MultiGraph;

/// Arbitrary small multigraph: `(n, directed, edges)`, self-loops and
/// parallel edges allowed.
pub fn arb_graph(max_n: usize, max_m: usize, max_w: u64) -> impl Strategy<Value = MultiGraph> {
    (1..=max_n, any::<bool>()).prop_flat_map(move |(n, directed)| {
        prop::collection::vec((0..n, 0..n, 1..=max_w), 0..=max_m)
            .prop_map(move |es| MultiGraph::from_pairs(n, directed, &es))
    })
}

/// Seeded connected partial k-tree.
pub fn ktree(n: usize, k: usize, keep: f64, max_w: u64, seed: u64, directed: bool) -> Instance {
    let opts = KTreeOptions { directed, connected: true, antiparallel_prob: 0.3, ..Default::default() };
    generate_partial_ktree_with(n, k, keep, 1..=max_w, seed, &opts).unwrap()
}

pub fn arb_ktree(max_n: usize, max_k: usize, max_w: u64) -> impl Strategy<Value = Instance> {
    (2..=max_n, 1..=max_k, 0.3f64..=1.0, any::<u64>(), any::<bool>())
        .prop_map(move |(n, k, keep, seed, directed)| ktree(n, k.min(n - 1), keep, max_w, seed, directed))
}

pub fn bipartite_ktree(n: usize, k: usize, keep: f64, seed: u64) -> Instance {
    let opts = KTreeOptions { connected: true, bipartite: true, ..Default::default() };
    generate_partial_ktree_with(n, k, keep, 1..=1, seed, &opts).unwrap()
}
