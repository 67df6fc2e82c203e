//! Applications of constrained distance labels: exact bipartite maximum
//! matching by separator divide-and-conquer with alternating walks, and
//! weighted girth (directed by label exchange, undirected by randomly
//! labelled count-1 closed walks).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::generate::rng_from;
use crate::graph::{dist_add, CommGraph, EdgeId, MultiGraph, TreeDecomposition, VertexId, INF};
use crate::labels::{broadcast_label, build_labels, decode, LabelError};
use crate::primitives::{pa, AggOp, Collection, Part, PrimError};
use crate::separator::SepConfig;
use crate::sim::{run, Flood, RunStats, SimConfig, SimError};
use crate::treedecomp::{decompose_components, TdError};
use crate::walks::{cdl_build, cdl_decode, colored, count, extract_with, WalkError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AppError {
    #[error("graph is not bipartite: edge ({0}, {1}) closes an odd cycle")]
    NotBipartite(VertexId, VertexId),
    #[error("graph must be undirected")]
    Directed,
    #[error("graph must be directed")]
    Undirected,
    #[error("graph is not simple")]
    NotSimple,
    #[error("edge weights must be positive")]
    NonPositiveWeight,
    #[error(transparent)]
    Td(#[from] TdError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Prim(#[from] PrimError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn components(comm: &CommGraph) -> Vec<Vec<VertexId>> {
    let label = comm.components_within(&vec![true; comm.n()]);
    let mut by: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for (v, &l) in label.iter().enumerate() {
        by.entry(l).or_default().push(v);
    }
    by.into_values().collect()
}

/// Part-wise minimum over the given vertex-disjoint connected parts.
fn part_min(
    comm: &CommGraph,
    parts: &[Vec<VertexId>],
    value: impl Fn(VertexId) -> u64,
    sim: &SimConfig,
) -> Result<(Vec<u64>, RunStats), AppError> {
    if parts.is_empty() {
        return Ok((vec![], RunStats::default()));
    }
    let coll = Collection::new(comm, parts.iter().map(|p| Part::induced(comm, p)).collect())?;
    let vals = coll.per_slot(|v, _| value(v));
    let (out, stats) = pa(comm, &coll, &vals, AggOp::Min, sim)?;
    Ok((coll.per_part(&out), stats))
}

// ---------------------------------------------------------------- matching

#[derive(Clone, Debug, Serialize)]
pub struct Matching {
    pub edges: Vec<EdgeId>,
    pub matched: Vec<bool>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// No two edges share an endpoint and the flags agree with the edges.
    pub fn is_valid(&self, g: &MultiGraph) -> bool {
        let mut seen = vec![false; g.n()];
        for &e in &self.edges {
            let ed = g.edge(e);
            if ed.u == ed.v || seen[ed.u] || seen[ed.v] {
                return false;
            }
            seen[ed.u] = true;
            seen[ed.v] = true;
        }
        seen == self.matched
    }
}

/// One successful augmentation from a newly added separator vertex.
#[derive(Clone, Debug, Serialize)]
pub struct Augmentation {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    /// Whether each edge was matched before the flip.
    pub was_matched: Vec<bool>,
}

impl Augmentation {
    pub fn is_simple(&self) -> bool {
        let set: BTreeSet<_> = self.vertices.iter().collect();
        set.len() == self.vertices.len()
    }

    /// Starts and ends with an unmatched edge and alternates in between.
    pub fn is_alternating(&self) -> bool {
        self.was_matched.first() == Some(&false)
            && self.was_matched.last() == Some(&false)
            && self.was_matched.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchingOutcome {
    pub matching: Matching,
    pub augmentations: Vec<Augmentation>,
    /// Every intermediate matching passed `Matching::is_valid`.
    pub intermediate_valid: bool,
    /// Number of constrained labelings built.
    pub cdl_builds: usize,
    pub stats: RunStats,
}

/// Distributed 2-coloring by BFS from the smallest id of each component,
/// then one exchange over every edge.
pub fn check_bipartite(g: &MultiGraph, sim: &SimConfig) -> Result<(Vec<bool>, RunStats), AppError> {
    let comm = g.comm_graph();
    let mut sources = vec![false; g.n()];
    for c in components(&comm) {
        sources[c[0]] = true;
    }
    let (hops, mut stats) = run(&comm, &Flood { sources }, "two_coloring", sim)?;
    let side: Vec<bool> = hops.iter().map(|h| h.unwrap_or(0) % 2 == 1).collect();
    stats.then(&RunStats { rounds: 1, max_message_bits: 1, messages_sent: 2 * comm.m() as u64, ..Default::default() });
    for e in g.edges() {
        if side[e.u] == side[e.v] {
            return Err(AppError::NotBipartite(e.u, e.v));
        }
    }
    Ok((side, stats.labelled("bipartite_check")))
}

/// Kuhn's augmenting-path matching restricted to `vs`.
fn local_matching(g: &MultiGraph, vs: &[VertexId], side: &[bool], mate: &mut [Option<EdgeId>]) {
    let inside: BTreeSet<VertexId> = vs.iter().copied().collect();
    fn try_kuhn(
        g: &MultiGraph,
        u: VertexId,
        inside: &BTreeSet<VertexId>,
        seen: &mut BTreeSet<VertexId>,
        mate: &mut [Option<EdgeId>],
    ) -> bool {
        for a in g.out_arcs(u) {
            let w = a.other;
            if !inside.contains(&w) || !seen.insert(w) {
                continue;
            }
            let free = match mate[w] {
                None => true,
                Some(e) => {
                    let ed = g.edge(e);
                    let x = if ed.u == w { ed.v } else { ed.u };
                    try_kuhn(g, x, inside, seen, mate)
                }
            };
            if free {
                mate[u] = Some(a.edge);
                mate[w] = Some(a.edge);
                return true;
            }
        }
        false
    }
    for &u in vs {
        if !side[u] && mate[u].is_none() {
            try_kuhn(g, u, &inside, &mut BTreeSet::new(), mate);
        }
    }
}

/// Rounds to gather a component at its smallest vertex and send the result
/// back: pipelined over a BFS tree, so twice its depth plus one message per edge.
fn gather_cost(comm: &CommGraph, vs: &[VertexId]) -> RunStats {
    let inside: BTreeSet<VertexId> = vs.iter().copied().collect();
    let mut depth = BTreeMap::from([(vs[0], 0usize)]);
    let mut q = VecDeque::from([vs[0]]);
    let mut edges = 0u64;
    while let Some(u) = q.pop_front() {
        for &w in comm.neighbors(u) {
            if inside.contains(&w) {
                edges += (u < w) as u64;
                if !depth.contains_key(&w) {
                    depth.insert(w, depth[&u] + 1);
                    q.push_back(w);
                }
            }
        }
    }
    let d = *depth.values().max().unwrap() as u64;
    RunStats { rounds: 2 * d + edges, messages_sent: 2 * edges, ..Default::default() }
}

fn mate_to_matching(mate: &[Option<EdgeId>]) -> Matching {
    let edges: BTreeSet<EdgeId> = mate.iter().flatten().copied().collect();
    Matching { edges: edges.into_iter().collect(), matched: mate.iter().map(|m| m.is_some()).collect() }
}

/// Exact maximum matching of a bipartite graph. Costs are ignored.
///
/// The separator recursion of the tree decomposition is replayed bottom-up.
/// Leaf components are solved at a leader. A non-leaf component has its
/// children solved; its separator vertices are then added one at a time,
/// each looking for one augmenting path from itself through alternating-colored
/// labels of the graph in which edges touching absent vertices cost infinity.
pub fn max_matching(g: &MultiGraph, cfg: &SepConfig, seed: u64, sim: &SimConfig) -> Result<MatchingOutcome, AppError> {
    if g.is_directed() {
        return Err(AppError::Directed);
    }
    let (side, mut stats) = check_bipartite(g, sim)?;
    let comm = g.comm_graph();
    let dec = decompose_components(&comm, cfg, seed, sim)?;
    stats.then(&dec.stats);

    let mut mate: Vec<Option<EdgeId>> = vec![None; g.n()];
    let mut present = vec![false; g.n()];
    let mut augmentations = Vec::new();
    let mut intermediate_valid = true;
    let mut cdl_builds = 0;

    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, r) in dec.recursion.iter().enumerate() {
        by_level.entry(r.id.len()).or_default().push(i);
    }
    for (_, nodes) in by_level.iter().rev() {
        let mut lvl = Vec::new();
        for &i in nodes {
            let r = &dec.recursion[i];
            if r.leaf {
                local_matching(g, &r.core, &side, &mut mate);
                for &v in &r.core {
                    present[v] = true;
                }
                lvl.push(gather_cost(&comm, &r.core));
            }
        }
        let mut level_stats = RunStats::parallel(&lvl).labelled("central_matching");

        let open: Vec<usize> = nodes.iter().copied().filter(|&i| !dec.recursion[i].leaf).collect();
        let steps = open.iter().map(|&i| dec.recursion[i].separator.len()).max().unwrap_or(0);
        for step in 0..steps {
            let active: Vec<(usize, VertexId)> = open
                .iter()
                .filter_map(|&i| dec.recursion[i].separator.get(step).map(|&s| (i, s)))
                .collect();
            for &(_, s) in &active {
                present[s] = true;
            }
            // Each new vertex checks locally whether it has a present neighbor.
            level_stats.then(&RunStats { rounds: 1, max_message_bits: 1, ..Default::default() });
            if !active.iter().any(|&(_, s)| comm.neighbors(s).iter().any(|&w| present[w])) {
                continue;
            }
            let costs: Vec<u64> = g.edges().iter().map(|e| if present[e.u] && present[e.v] { 1 } else { INF }).collect();
            let gm = g.with_costs(&costs);
            let color: Vec<usize> = (0..g.m()).map(|e| (mate[g.edge(e).u] == Some(e)) as usize).collect();
            let c = colored(&gm, 2, &color)?;
            let unmatched_state = 0;
            let cdl = cdl_build(&gm, &c, &dec.td, sim)?;
            cdl_builds += 1;
            level_stats.then(&RunStats { rounds: cdl.rounds_on_g, ..cdl.product_stats.clone() }.labelled("cdl"));

            // Every present free vertex decodes its distance from the new
            // vertex; the component picks the closest (smallest id on ties).
            let mut per = Vec::new();
            let mut picks = Vec::new();
            for &(i, s) in &active {
                let core = &dec.recursion[i].core;
                let ls = &cdl.labels[s];
                let key = |t: VertexId| -> u64 {
                    if t == s || !present[t] || mate[t].is_some() {
                        return INF;
                    }
                    match cdl_decode(unmatched_state, ls, &cdl.labels[t]) {
                        Ok(d) if d != INF => d * g.n() as u64 + t as u64,
                        _ => INF,
                    }
                };
                let (best, ps) = part_min(&comm, std::slice::from_ref(core), key, sim)?;
                let mut st = broadcast_label(&cdl.product.graph, &ls.per_state[c.start()], sim)?;
                st.rounds *= cdl.cost.serialization as u64;
                st.then(&ps);
                per.push(st);
                if best[0] != INF {
                    picks.push((s, (best[0] % g.n() as u64) as VertexId));
                }
            }
            level_stats.then(&RunStats::parallel(&per).labelled("augment_search"));

            let mut walks = Vec::new();
            for (s, t) in picks {
                let (w, ws) = extract_with(&gm, &c, &cdl, s, t, unmatched_state, sim)?;
                walks.push(ws);
                let was_matched: Vec<bool> = w.edges.iter().map(|&e| color[e] == 1).collect();
                for (k, &e) in w.edges.iter().enumerate() {
                    let ed = g.edge(e);
                    if !was_matched[k] {
                        mate[ed.u] = Some(e);
                        mate[ed.v] = Some(e);
                    }
                }
                intermediate_valid &= mate_to_matching(&mate).is_valid(g);
                augmentations.push(Augmentation { vertices: w.vertices, edges: w.edges, was_matched });
            }
            level_stats.then(&RunStats::parallel(&walks).labelled("augment_walk"));
        }
        stats.then(&level_stats);
    }
    let matching = mate_to_matching(&mate);
    intermediate_valid &= matching.is_valid(g);
    Ok(MatchingOutcome { matching, augmentations, intermediate_valid, cdl_builds, stats: stats.labelled("matching") })
}

// ------------------------------------------------------------------- girth

fn check_positive(g: &MultiGraph) -> Result<(), AppError> {
    if g.edges().iter().any(|e| e.cost == 0) {
        return Err(AppError::NonPositiveWeight);
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct GirthOutcome {
    /// `INF` when there is no cycle.
    pub girth: u64,
    pub trials: Vec<GirthTrial>,
    pub stats: RunStats,
}

/// Directed girth: every edge `(u, v)` closes a cycle of weight
/// `cost + d(v, u)`, read from the labels exchanged over the edge.
pub fn girth_directed(g: &MultiGraph, td: &TreeDecomposition, sim: &SimConfig) -> Result<GirthOutcome, AppError> {
    if !g.is_directed() {
        return Err(AppError::Undirected);
    }
    check_positive(g)?;
    let dl = build_labels(g, td, sim)?;
    let mut stats = dl.stats.clone();
    // Labels cross every edge in both directions, one hub entry per round.
    let longest = dl.labels.iter().map(|l| l.hubs.len()).max().unwrap_or(0) as u64;
    stats.then(
        &RunStats {
            rounds: longest,
            max_message_bits: dl.stats.max_message_bits,
            messages_sent: 2 * longest * g.m() as u64,
            ..Default::default()
        }
        .labelled("label_exchange"),
    );
    let mut local = vec![INF; g.n()];
    for e in g.edges() {
        let c = dist_add(e.cost, decode(&dl.labels[e.v], &dl.labels[e.u])?);
        local[e.u] = local[e.u].min(c);
    }
    let comm = g.comm_graph();
    let (mins, ps) = part_min(&comm, &components(&comm), |v| local[v], sim)?;
    stats.then(&ps);
    Ok(GirthOutcome { girth: mins.into_iter().min().unwrap_or(INF), trials: vec![], stats: stats.labelled("girth") })
}

#[derive(Clone, Debug, Serialize)]
pub struct GirthConfig {
    /// Largest doubling exponent; default `ceil(log2 n^2) + 1`.
    pub ceiling_exp: Option<u32>,
    /// Trials per estimate are `c1 * ceil(log2 n)`.
    pub c1: u32,
    pub sep: SepConfig,
}

impl Default for GirthConfig {
    fn default() -> Self {
        GirthConfig { ceiling_exp: None, c1: 2, sep: SepConfig::desk() }
    }
}

fn log2_ceil(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

impl GirthConfig {
    pub fn ceiling(&self, n: usize) -> u32 {
        self.ceiling_exp.unwrap_or(log2_ceil((n as u64).pow(2)) + 1)
    }

    pub fn trials(&self, n: usize) -> u32 {
        self.c1 * log2_ceil(n as u64).max(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GirthTrial {
    pub c_hat: u64,
    pub trial: u32,
    /// Shortest exact count-1 closed walk over all vertices.
    pub value: u64,
}

/// Random labels: each edge independently gets label one with probability `1/(3 c_hat)`.
pub fn sample_labels(m: usize, c_hat: u64, seed: u64) -> Vec<bool> {
    let mut rng = rng_from(seed);
    let p = 1.0 / (3.0 * c_hat as f64);
    (0..m).map(|_| rng.gen_bool(p)).collect()
}

/// One trial: label edges at random, build count-1 labels, and take the
/// minimum over vertices of the exact count-1 closed walk read from each
/// vertex's own label.
pub fn girth_trial(
    g: &MultiGraph,
    td: &TreeDecomposition,
    c_hat: u64,
    seed: u64,
    sim: &SimConfig,
) -> Result<(u64, RunStats), AppError> {
    let bits = sample_labels(g.m(), c_hat, seed);
    let c = count(g, 1, &bits)?;
    let one = c.state("1").expect("count state");
    let cdl = cdl_build(g, &c, td, sim)?;
    let local: Vec<u64> = cdl.labels.iter().map(|l| cdl_decode(one, l, l)).collect::<Result<_, _>>()?;
    let comm = g.comm_graph();
    let (mins, ps) = part_min(&comm, &components(&comm), |v| local[v], sim)?;
    let mut stats = RunStats { rounds: cdl.rounds_on_g, ..cdl.product_stats };
    stats.then(&ps);
    Ok((mins.into_iter().min().unwrap_or(INF), stats))
}

fn trial_seed(seed: u64, exp: u32, trial: u32) -> u64 {
    seed ^ ((exp as u64) << 32 | trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Undirected girth from count-1 closed walks, doubling the estimate of the
/// number of edges on shortest cycles.
pub fn girth_undirected(g: &MultiGraph, cfg: &GirthConfig, seed: u64, sim: &SimConfig) -> Result<GirthOutcome, AppError> {
    if g.is_directed() {
        return Err(AppError::Directed);
    }
    check_positive(g)?;
    let mut pairs = BTreeSet::new();
    for e in g.edges() {
        if e.u == e.v || !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(AppError::NotSimple);
        }
    }
    let dec = decompose_components(&g.comm_graph(), &cfg.sep, seed, sim)?;
    girth_undirected_with(g, &dec.td, cfg, seed, sim).map(|mut o| {
        let mut st = dec.stats;
        st.then(&o.stats);
        o.stats = st.labelled("girth");
        o
    })
}

/// As `girth_undirected` with a given decomposition.
pub fn girth_undirected_with(
    g: &MultiGraph,
    td: &TreeDecomposition,
    cfg: &GirthConfig,
    seed: u64,
    sim: &SimConfig,
) -> Result<GirthOutcome, AppError> {
    let mut stats = RunStats::default();
    let mut trials = Vec::new();
    let mut best = INF;
    for exp in 0..=cfg.ceiling(g.n()) {
        let c_hat = 1u64 << exp;
        for trial in 0..cfg.trials(g.n()) {
            let (value, st) = girth_trial(g, td, c_hat, trial_seed(seed, exp, trial), sim)?;
            stats.then(&st);
            best = best.min(value);
            trials.push(GirthTrial { c_hat, trial, value });
        }
    }
    Ok(GirthOutcome { girth: best, trials, stats: stats.labelled("girth") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{cycle, path, star};

    #[test]
    fn path_and_star() {
        let cfg = SepConfig::desk();
        let sim = SimConfig::default();
        let m = max_matching(&path(4).graph, &cfg, 1, &sim).unwrap();
        assert_eq!(m.matching.size(), 2);
        assert!(m.matching.is_valid(&path(4).graph));
        let s = star(4);
        assert_eq!(max_matching(&s.graph, &cfg, 1, &sim).unwrap().matching.size(), 1);
    }

    #[test]
    fn odd_cycle_rejected() {
        let r = max_matching(&cycle(5).graph, &SepConfig::desk(), 0, &SimConfig::default());
        assert!(matches!(r, Err(AppError::NotBipartite(_, _))));
    }

    #[test]
    fn directed_triangle_and_dag() {
        let g = MultiGraph::from_pairs(3, true, &[(0, 1, 1), (1, 2, 2), (2, 0, 3)]);
        let td = TreeDecomposition::single_bag(3);
        assert_eq!(girth_directed(&g, &td, &SimConfig::default()).unwrap().girth, 6);
        let dag = MultiGraph::from_pairs(3, true, &[(0, 1, 1), (1, 2, 2), (0, 2, 3)]);
        assert_eq!(girth_directed(&dag, &td, &SimConfig::default()).unwrap().girth, INF);
    }

    #[test]
    fn undirected_small() {
        let tri = MultiGraph::from_pairs(3, false, &[(0, 1, 1), (1, 2, 2), (2, 0, 3)]);
        let cfg = GirthConfig::default();
        assert_eq!(girth_undirected(&tri, &cfg, 4, &SimConfig::default()).unwrap().girth, 6);
        assert_eq!(girth_undirected(&cycle(4).graph, &cfg, 4, &SimConfig::default()).unwrap().girth, 4);
        assert_eq!(girth_undirected(&path(5).graph, &cfg, 4, &SimConfig::default()).unwrap().girth, INF);
    }

    #[test]
    fn doubling_defaults() {
        let cfg = GirthConfig::default();
        assert_eq!(cfg.ceiling(10), 8);
        assert_eq!(cfg.trials(10), 8);
        assert_eq!(log2_ceil(1), 0);
        assert_eq!(log2_ceil(8), 3);
        assert_eq!(log2_ceil(9), 4);
    }
}
