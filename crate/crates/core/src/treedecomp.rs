//! Recursive tree decomposition built from balanced separators.
//!
//! Level by level, every live component `G'_x` (a connected component of
//! `G - B_{p(x)}`) computes a separator `S'_x` of its own vertex set. The
//! bag of `x` keeps the parent-bag vertices adjacent to `G'_x` plus `S'_x`,
//! and the components of `G'_x - S'_x` become the children of `x`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BagId, CommGraph, MultiGraph, TreeDecomposition, VertexId};
use crate::primitives::{ccd, core_forest, pa_many, AggOp, Collection, Part, PrimError};
use crate::separator::{induced_comm, parallel_separators, SepConfig, SepError};
use crate::sim::{value_bits, RunStats, SimConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TdError {
    #[error("communication graph is disconnected")]
    Disconnected,
    #[error(transparent)]
    Separator(#[from] SepError),
    #[error(transparent)]
    Prim(#[from] PrimError),
}

/// Per-level summary of the recursion.
#[derive(Clone, Debug, Serialize)]
pub struct LevelInfo {
    pub level: usize,
    pub components: usize,
    pub leaves: usize,
    pub max_separator: usize,
    pub max_t: u64,
    pub rounds: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TdOutcome {
    #[serde(skip)]
    pub td: TreeDecomposition,
    pub width: i64,
    pub depth: usize,
    /// Largest terminal estimate over all separator calls.
    pub max_t: u64,
    pub max_separator: usize,
    /// `ceil(log_{1/alpha} n) + 1`.
    pub depth_bound: usize,
    /// `size_bound(max_t) * (depth + 1)`.
    pub width_bound: u64,
    pub levels: Vec<LevelInfo>,
    #[serde(skip)]
    pub recursion: Vec<RecursionNode>,
    pub stats: RunStats,
}

/// One component of the separator recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionNode {
    pub id: BagId,
    /// `V(G'_x)`, sorted.
    pub core: Vec<VertexId>,
    /// `S'_x`, sorted; unused when `leaf`.
    pub separator: Vec<VertexId>,
    pub leaf: bool,
}

impl TdOutcome {
    pub fn depth_ok(&self) -> bool {
        self.depth <= self.depth_bound
    }

    pub fn width_ok(&self) -> bool {
        self.width < 0 || self.width as u64 <= self.width_bound
    }
}

/// `ceil(log_{1/alpha}(n)) + 1` for the configured balance `alpha`.
pub fn depth_bound(cfg: &SepConfig, n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let base = cfg.alpha_den as f64 / cfg.alpha_num as f64;
    // Round away tiny float noise before the ceiling.
    let l = (n as f64).ln() / base.ln();
    (l - 1e-9).ceil() as usize + 1
}

/// Max bag size minus one; `-1` for a decomposition without vertices.
pub fn decomposition_witness_width(td: &TreeDecomposition) -> i64 {
    td.width()
}

struct Live {
    id: BagId,
    /// `V(G'_x)`, sorted.
    core: Vec<VertexId>,
}

/// Distributed tree decomposition of the communication graph of `g`.
pub fn build_tree_decomposition(
    g: &MultiGraph,
    cfg: &SepConfig,
    seed: u64,
    sim: &SimConfig,
) -> Result<TdOutcome, TdError> {
    decompose_comm(&g.comm_graph(), cfg, seed, sim)
}

pub fn decompose_comm(comm: &CommGraph, cfg: &SepConfig, seed: u64, sim: &SimConfig) -> Result<TdOutcome, TdError> {
    cfg.validate()?;
    let n = comm.n();
    if n == 0 || !comm.is_connected() {
        return Err(TdError::Disconnected);
    }
    let mut td = TreeDecomposition::new();
    let mut stats = RunStats::default();
    let mut levels = Vec::new();
    let mut max_t = 0;
    let mut max_sep = 0;
    let mut live = vec![Live { id: vec![], core: (0..n).collect() }];
    // membership of v in the parent bag of its current component
    let mut parent_bag: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new()];
    let mut level = 0usize;
    let mut recursion = Vec::new();

    while !live.is_empty() {
        let parts: Vec<Vec<VertexId>> = live.iter().map(|l| l.core.clone()).collect();
        let lvl_seed = seed ^ (level as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let (outs, sep_stats) = parallel_separators(comm, &parts, &parts, cfg, lvl_seed, sim)?;
        let mut lvl_stats = sep_stats;

        let mut in_core = vec![usize::MAX; n];
        for (i, l) in live.iter().enumerate() {
            for &v in &l.core {
                in_core[v] = i;
            }
        }

        // Boundary: parent-bag vertices adjacent to G'_x learn so from one
        // exchange of component leaders over their edges.
        let mut boundary: Vec<Vec<VertexId>> = Vec::with_capacity(live.len());
        for (i, l) in live.iter().enumerate() {
            let mut b = BTreeSet::new();
            for &v in &l.core {
                for &w in comm.neighbors(v) {
                    if in_core[w] != i {
                        assert!(parent_bag[i].contains(&w), "neighbor of a live component outside its parent bag");
                        b.insert(w);
                    }
                }
            }
            boundary.push(b.into_iter().collect());
        }
        let exch = RunStats {
            rounds: 1,
            max_message_bits: value_bits(n as u64),
            messages_sent: live.iter().map(|l| l.core.iter().map(|&v| comm.neighbors(v).len() as u64).sum::<u64>()).sum(),
            ..Default::default()
        }
        .labelled("boundary");
        lvl_stats.then(&exch);

        // Leaf test by part-wise sums over G_x: |V(G_x)| and |S_x|.
        let seps: Vec<BTreeSet<VertexId>> = outs.iter().map(|o| o.separator.iter().copied().collect()).collect();
        let gx_parts: Vec<Part> = live
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut vs = l.core.clone();
                vs.extend(boundary[i].iter().copied());
                vs.sort_unstable();
                let mut edges = Vec::new();
                for &v in &l.core {
                    for &w in comm.neighbors(v) {
                        if in_core[w] != i || v < w {
                            edges.push((v.min(w), v.max(w)));
                        }
                    }
                }
                Part { vertices: vs, edges }
            })
            .collect();
        let gx = Collection::new(comm, gx_parts)?;
        let (forest, fs) = core_forest(comm, &gx, sim)?;
        lvl_stats.then(&fs);
        let count = gx.per_slot(|_, _| 1u64);
        let in_s = gx.per_slot(|v, p| (seps[p].contains(&v) || in_core[v] != p) as u64);
        let (sums, ps) = pa_many(comm, &gx, &forest, &[count, in_s], AggOp::Sum, sim)?;
        lvl_stats.then(&ps);
        let size_gx = gx.per_part(&sums[0]);
        let size_sx = gx.per_part(&sums[1]);

        // Components of G'_x - S'_x.
        let gpx = Collection::new(comm, live.iter().map(|l| Part::induced(comm, &l.core)).collect())?;
        let keep = |p: usize, u: VertexId, w: VertexId| !seps[p].contains(&u) && !seps[p].contains(&w);
        let (labels, cs) = ccd(comm, &gpx, &keep, sim)?;
        lvl_stats.then(&cs);

        let mut next = Vec::new();
        let mut next_parent = Vec::new();
        let mut info = LevelInfo {
            level,
            components: live.len(),
            leaves: 0,
            max_separator: 0,
            max_t: 0,
            rounds: 0,
        };
        for (i, l) in live.iter().enumerate() {
            let o = &outs[i];
            max_t = max_t.max(o.t);
            info.max_t = info.max_t.max(o.t);
            info.max_separator = info.max_separator.max(o.separator.len());
            max_sep = max_sep.max(o.separator.len());
            let leaf = size_gx[i] <= 2 * size_sx[i];
            recursion.push(RecursionNode {
                id: l.id.clone(),
                core: l.core.clone(),
                separator: seps[i].iter().copied().collect(),
                leaf,
            });
            if leaf {
                let mut bag = l.core.clone();
                bag.extend(boundary[i].iter().copied());
                td.insert(l.id.clone(), bag);
                info.leaves += 1;
                continue;
            }
            let mut bag: BTreeSet<VertexId> = boundary[i].iter().copied().collect();
            bag.extend(seps[i].iter().copied());
            // B_x lies in V(G_x) and differs from the parent bag only by S'_x.
            let gx_set: BTreeSet<VertexId> = l.core.iter().chain(boundary[i].iter()).copied().collect();
            assert!(bag.is_subset(&gx_set));
            assert!(bag.iter().all(|v| seps[i].contains(v) || parent_bag[i].contains(v)));
            let mut comps: std::collections::BTreeMap<VertexId, Vec<VertexId>> = Default::default();
            for &v in &l.core {
                if !seps[i].contains(&v) {
                    let s = gpx.slot_of(v, i).unwrap();
                    comps.entry(labels[v][s]).or_default().push(v);
                }
            }
            for (rank, (_, core)) in comps.into_iter().enumerate() {
                let mut id = l.id.clone();
                id.push(rank);
                next.push(Live { id, core });
                next_parent.push(bag.clone());
            }
            td.insert(l.id.clone(), bag.into_iter().collect());
        }
        info.rounds = lvl_stats.rounds;
        levels.push(info);
        stats.then(&lvl_stats);
        live = next;
        parent_bag = next_parent;
        level += 1;
    }

    let depth = td.depth();
    Ok(TdOutcome {
        width: td.width(),
        depth,
        max_t,
        max_separator: max_sep,
        depth_bound: depth_bound(cfg, n),
        width_bound: cfg.size_bound(max_t) * (depth as u64 + 1),
        levels,
        recursion,
        stats: stats.labelled("tree_decomposition"),
        td,
    })
}

/// Decomposition of a possibly disconnected network: components are
/// decomposed in parallel and their trees hung below the root of the first.
#[derive(Clone, Debug)]
pub struct ForestOutcome {
    pub td: TreeDecomposition,
    /// Recursion nodes of every component, in global ids.
    pub recursion: Vec<RecursionNode>,
    pub max_t: u64,
    pub stats: RunStats,
}

pub fn decompose_components(
    comm: &CommGraph,
    cfg: &SepConfig,
    seed: u64,
    sim: &SimConfig,
) -> Result<ForestOutcome, TdError> {
    let n = comm.n();
    let label = comm.components_within(&vec![true; n]);
    let mut comps: std::collections::BTreeMap<usize, Vec<VertexId>> = Default::default();
    for v in 0..n {
        comps.entry(label[v]).or_default().push(v);
    }
    let local_sim = SimConfig { id_universe: sim.id_universe.max(n), ..*sim };
    let mut td = TreeDecomposition::new();
    let mut recursion = Vec::new();
    let mut all = Vec::new();
    let mut max_t = 0;
    let mut next_child = 0;
    for (j, vs) in comps.values().enumerate() {
        let sub = induced_comm(comm, vs);
        let o = decompose_comm(&sub, cfg, seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), &local_sim)?;
        let prefix: BagId = if j == 0 {
            next_child = o.td.children(&[]).len();
            vec![]
        } else {
            next_child += 1;
            vec![next_child - 1]
        };
        let lift = |id: &BagId| prefix.iter().chain(id.iter()).copied().collect::<BagId>();
        for (id, bag) in o.td.iter() {
            td.insert(lift(id), bag.iter().map(|&v| vs[v]).collect());
        }
        for r in o.recursion {
            recursion.push(RecursionNode {
                id: lift(&r.id),
                core: r.core.iter().map(|&v| vs[v]).collect(),
                separator: r.separator.iter().map(|&v| vs[v]).collect(),
                leaf: r.leaf,
            });
        }
        max_t = max_t.max(o.max_t);
        all.push(o.stats);
    }
    Ok(ForestOutcome { td, recursion, max_t, stats: RunStats::parallel(&all).labelled("tree_decomposition") })
}
