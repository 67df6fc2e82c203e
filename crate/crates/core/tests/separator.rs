mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use tw_congest::generate::rng_from;
use tw_congest::oracles::oracle_balance;
use tw_congest::separator::{find_balanced_separator, SepConfig};
use tw_congest::sim::SimConfig;

use common::ktree;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn separator_balanced_and_bounded(
        n in 2usize..220,
        k in 1usize..4,
        frac in 0.1f64..=1.0,
        seed in any::<u64>(),
        desk in any::<bool>(),
    ) {
        let cfg = if desk { SepConfig::desk() } else { SepConfig::paper() };
        let c = ktree(n, k.min(n - 1), 0.7, 1, seed, false).graph.comm_graph();
        let mut xs: Vec<usize> = (0..n).collect();
        xs.shuffle(&mut rng_from(seed ^ 3));
        xs.truncate(((n as f64 * frac) as usize).max(1));
        xs.sort_unstable();
        let out = find_balanced_separator(&c, &xs, &cfg, seed, &SimConfig::default()).unwrap();
        prop_assert!(oracle_balance(&c, &out.separator, &xs, (cfg.alpha_num, cfg.alpha_den)));
        prop_assert!(out.separator.len() as u64 <= cfg.size_bound(out.t));
        prop_assert_eq!(out.t_history.last().copied(), Some(out.t));
        prop_assert!(out.t_history.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn separator_is_deterministic_per_seed() {
    let c = ktree(300, 3, 0.7, 1, 11, false).graph.comm_graph();
    let xs: Vec<usize> = (0..300).collect();
    let cfg = SepConfig::desk();
    let a = find_balanced_separator(&c, &xs, &cfg, 4, &SimConfig::default()).unwrap();
    let b = find_balanced_separator(&c, &xs, &cfg, 4, &SimConfig::default()).unwrap();
    assert_eq!(a.separator, b.separator);
    assert_eq!(a.stats, b.stats);
}

#[test]
fn disconnected_rejected() {
    let c = tw_congest::graph::CommGraph::from_edges(4, [(0, 1), (2, 3)]);
    assert!(find_balanced_separator(&c, &[0, 1, 2, 3], &SepConfig::desk(), 0, &SimConfig::default()).is_err());
}

#[test]
fn profiles_known() {
    assert!(SepConfig::by_name("desk").is_some());
    assert!(SepConfig::by_name("paper").is_some());
    assert!(SepConfig::by_name("other").is_none());
    let p = SepConfig::paper();
    assert_eq!((p.alpha_num, p.alpha_den), (14399, 14400));
}
