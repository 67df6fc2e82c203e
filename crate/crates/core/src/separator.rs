//! Randomized balanced separators: spanning-tree splitting, iterative root
//! removal and sampled pairwise vertex cuts, with doubling on the estimate
//! `t` of treewidth plus one.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::generate::rng_from;
use crate::graph::{CommGraph, VertexId, INF};
use crate::primitives::{
    bct, ccd, core_forest, mvc, pa_on, rst, tree_aggregate, AggOp, Collection, CutResult, Forest, Part, PrimError,
};
use crate::sim::{RunStats, SimConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SepError {
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Prim(#[from] PrimError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SepConfig {
    pub alpha_num: u64,
    pub alpha_den: u64,
    pub base_cutoff: u64,
    pub pair_samples: usize,
    pub size_bound_mult: u64,
    pub trials: u64,
    pub split_lo_div: u64,
    pub split_hi_div: u64,
    pub iter_num: u64,
    pub iter_den: u64,
    pub profile: String,
}

impl SepConfig {
    pub fn paper() -> SepConfig {
        SepConfig {
            alpha_num: 14399,
            alpha_den: 14400,
            base_cutoff: 200,
            pair_samples: 95,
            size_bound_mult: 400,
            trials: 5,
            split_lo_div: 12,
            split_hi_div: 4,
            iter_num: 301,
            iter_den: 300,
            profile: "paper".into(),
        }
    }

    /// Reduced constants so that the recursion is exercised on small graphs.
    pub fn desk() -> SepConfig {
        SepConfig {
            alpha_num: 3,
            alpha_den: 4,
            base_cutoff: 4,
            pair_samples: 20,
            size_bound_mult: 60,
            trials: 2,
            profile: "desk".into(),
            ..SepConfig::paper()
        }
    }

    pub fn by_name(name: &str) -> Option<SepConfig> {
        match name {
            "paper" => Some(SepConfig::paper()),
            "desk" => Some(SepConfig::desk()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SepError> {
        let ok = self.alpha_den > 0
            && 0 < self.alpha_num
            && self.alpha_num < self.alpha_den
            && 2 * self.alpha_num >= self.alpha_den
            && self.base_cutoff > 0
            && self.pair_samples > 0
            && self.size_bound_mult > 0
            && self.trials > 0
            && self.split_lo_div > 0
            && self.split_hi_div > 0
            && self.iter_den > 0
            && self.iter_num >= self.iter_den;
        if ok {
            Ok(())
        } else {
            Err(SepError::BadConfig(format!("{:?}", self)))
        }
    }

    /// Number of root-removal iterations: `t + ceil(t (num - den) / den)`.
    pub fn iterations(&self, t: u64) -> u64 {
        t + (t * (self.iter_num - self.iter_den)).div_ceil(self.iter_den)
    }

    /// Bound on the separator size for estimate `t`.
    pub fn size_bound(&self, t: u64) -> u64 {
        self.size_bound_mult * t * t / 2
    }

    /// `mu * den <= num * total`.
    pub fn balanced(&self, mu: u64, total: u64) -> bool {
        mu as u128 * self.alpha_den as u128 <= self.alpha_num as u128 * total as u128
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SepPath {
    /// The target set itself was small enough.
    Target,
    /// Roots of the split trees after this many iterations.
    RootSet { iteration: u64 },
    /// Union of sampled pairwise cuts, found in this trial.
    Cuts { trial: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SepOutcome {
    pub separator: Vec<VertexId>,
    /// Terminal estimate.
    pub t: u64,
    pub path: SepPath,
    /// Every estimate tried, in order.
    pub t_history: Vec<u64>,
    pub stats: RunStats,
}

/// A tree of the splitting procedure; trees meet only at shared vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitTree {
    pub root: VertexId,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl SplitTree {
    fn part(&self) -> Part {
        Part { vertices: self.vertices.clone(), edges: self.edges.clone() }
    }
    fn measure(&self, x: &[bool]) -> u64 {
        self.vertices.iter().filter(|&&v| x[v]).count() as u64
    }
    /// Identifier: root and largest child of the root.
    fn id(&self) -> (u64, u64) {
        let mc = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == self.root { Some(b) } else if b == self.root { Some(a) } else { None })
            .max()
            .unwrap_or(self.root);
        (self.root as u64, mc as u64)
    }
}

/// Split thresholds for one invocation: `lo = mu_g / lo_div`,
/// `hi = mu_g / hi_div`, compared without division.
#[derive(Clone, Copy, Debug)]
pub struct Windows {
    pub mu_g: u64,
    pub lo_div: u64,
    pub hi_div: u64,
}

impl Windows {
    pub fn new(cfg: &SepConfig, mu_g: u64, t: u64) -> Windows {
        Windows { mu_g, lo_div: cfg.split_lo_div * t, hi_div: cfg.split_hi_div * t }
    }
    pub fn at_least_lo(&self, x: u64) -> bool {
        x * self.lo_div >= self.mu_g
    }
    fn below_twice_lo(&self, x: u64) -> bool {
        x * self.lo_div < 2 * self.mu_g
    }
    pub fn above_hi(&self, x: u64) -> bool {
        x * self.hi_div > self.mu_g
    }
}

/// Grouping decision at the center: `children` are `(id, size)` of the
/// subtrees below the center, `own` the center's weight. Returns the cut
/// children (each forms its own tree) and the groups of light children
/// (each group plus the center forms a tree). When the remainder is too
/// light it is merged into the first cut child, signalled by `merged`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    pub cut: Vec<VertexId>,
    pub groups: Vec<Vec<VertexId>>,
    pub merged: bool,
}

pub fn plan_split(children: &[(VertexId, u64)], own: u64, w: &Windows) -> SplitPlan {
    let mut kids = children.to_vec();
    kids.sort_unstable();
    let cut: Vec<VertexId> = kids.iter().filter(|c| w.at_least_lo(c.1)).map(|c| c.0).collect();
    let light: Vec<(VertexId, u64)> = kids.iter().copied().filter(|c| !w.at_least_lo(c.1)).collect();
    let rest = own + light.iter().map(|c| c.1).sum::<u64>();
    if !cut.is_empty() && !w.at_least_lo(rest) {
        return SplitPlan { cut, groups: vec![], merged: true };
    }
    let mut groups: Vec<Vec<VertexId>> = Vec::new();
    // Every group tree contains the center, so its weight counts toward
    // each group; otherwise tiny measures can leave one group holding the
    // whole tree.
    let mut cur = Vec::new();
    let mut acc = own;
    for &(y, s) in &light {
        cur.push(y);
        acc += s;
        if w.at_least_lo(acc) {
            debug_assert!(w.below_twice_lo(acc) || own > 0 && w.at_least_lo(own));
            groups.push(std::mem::take(&mut cur));
            acc = own;
        }
    }
    if !cur.is_empty() || groups.is_empty() {
        match groups.last_mut() {
            Some(g) => g.extend(cur),
            None => groups.push(cur),
        }
    }
    SplitPlan { cut, groups, merged: false }
}

fn subtree(children: &HashMap<VertexId, Vec<VertexId>>, top: VertexId, verts: &mut Vec<VertexId>, edges: &mut Vec<(VertexId, VertexId)>) {
    let mut stack = vec![top];
    while let Some(u) = stack.pop() {
        verts.push(u);
        if let Some(cs) = children.get(&u) {
            for &c in cs {
                edges.push((u.min(c), u.max(c)));
                stack.push(c);
            }
        }
    }
}

fn make_tree(root: VertexId, mut vertices: Vec<VertexId>, mut edges: Vec<(VertexId, VertexId)>) -> SplitTree {
    vertices.sort_unstable();
    vertices.dedup();
    edges.sort_unstable();
    SplitTree { root, vertices, edges }
}

/// One invocation of the splitting procedure on every tree of `trees` in
/// parallel. Returns the split trees per input tree.
pub fn split_all(
    comm: &CommGraph,
    trees: &[SplitTree],
    x: &[bool],
    w: &Windows,
    sim: &SimConfig,
) -> Result<(Vec<Vec<SplitTree>>, RunStats), SepError> {
    let mut stats = RunStats::default();
    let coll = Collection::edge_disjoint(comm, trees.iter().map(|t| t.part()).collect())?;
    let roots: Vec<VertexId> = trees.iter().map(|t| t.root).collect();
    let xs = coll.per_slot(|v, _| x[v] as u64);

    // Subtree sizes under the current roots.
    let (f1, s) = rst(comm, &coll, &roots, sim)?;
    stats.then(&s);
    let (agg, s) = tree_aggregate(comm, &coll, &f1, &xs, AggOp::Sum, true, sim)?;
    stats.then(&s);

    // Center candidates: every child at most half, own subtree at least half.
    let cand = coll.per_slot(|v, p| {
        let sl = coll.slot_of(v, p).unwrap();
        let a = agg[v][sl];
        let total = a.total.unwrap();
        let kids_ok = f1.children[v][sl].iter().all(|&c| 2 * agg[c][coll.slot_of(c, p).unwrap()].sub <= total);
        if kids_ok && 2 * a.sub >= total {
            v as u64
        } else {
            INF
        }
    });
    let (lead, s) = tree_aggregate(comm, &coll, &f1, &cand, AggOp::Min, true, sim)?;
    stats.then(&s);
    let centers: Vec<VertexId> = coll.per_part(&lead).into_iter().map(|a| a.total.unwrap() as VertexId).collect();

    // Re-root at the centers and recompute subtree sizes.
    let (f2, s) = rst(comm, &coll, &centers, sim)?;
    stats.then(&s);
    let (agg2, s) = tree_aggregate(comm, &coll, &f2, &xs, AggOp::Sum, false, sim)?;
    stats.then(&s);

    let mut out = Vec::with_capacity(trees.len());
    for (p, tree) in trees.iter().enumerate() {
        let c = centers[p];
        let mut children: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for &v in &tree.vertices {
            let sl = coll.slot_of(v, p).unwrap();
            children.insert(v, f2.children[v][sl].clone());
        }
        let kids: Vec<(VertexId, u64)> =
            children[&c].iter().map(|&y| (y, agg2[y][coll.slot_of(y, p).unwrap()].sub)).collect();
        let plan = plan_split(&kids, x[c] as u64, w);
        let mut res = Vec::new();
        let mut assigned: BTreeSet<VertexId> = BTreeSet::new();
        for (k, &y) in plan.cut.iter().enumerate() {
            let (mut vs, mut es) = (Vec::new(), Vec::new());
            subtree(&children, y, &mut vs, &mut es);
            if plan.merged && k == 0 {
                // The light remainder (center and light children) joins
                // the first cut child, rooted at the center.
                vs.push(c);
                es.push((c.min(y), c.max(y)));
                for &(z, _) in kids.iter().filter(|k| !plan.cut.contains(&k.0)) {
                    subtree(&children, z, &mut vs, &mut es);
                    es.push((c.min(z), c.max(z)));
                }
                res.push(make_tree(c, vs, es));
            } else {
                res.push(make_tree(y, vs, es));
            }
            assigned.insert(y);
        }
        for g in &plan.groups {
            let (mut vs, mut es) = (vec![c], Vec::new());
            for &z in g {
                subtree(&children, z, &mut vs, &mut es);
                es.push((c.min(z), c.max(z)));
            }
            res.push(make_tree(c, vs, es));
        }
        check_split(tree, &res, c, x, w);
        out.push(res);
    }

    // Each new tree learns its profile from its root.
    let flat: Vec<&SplitTree> = out.iter().flatten().collect();
    if !flat.is_empty() {
        let coll2 = Collection::edge_disjoint(comm, flat.iter().map(|t| t.part()).collect())?;
        let roots2: Vec<VertexId> = flat.iter().map(|t| t.root).collect();
        let (f3, s) = rst(comm, &coll2, &roots2, sim)?;
        stats.then(&s);
        let items = coll2.per_slot(|v, p| {
            if roots2[p] == v {
                let (a, b) = flat[p].id();
                vec![(a, b, flat[p].measure(x))]
            } else {
                vec![]
            }
        });
        let (_, s) = bct(comm, &coll2, &f3, 1, &items, sim)?;
        stats.then(&s);
    }
    Ok((out, stats.labelled("split")))
}

/// Split postconditions: the trees cover the tree's vertices, use disjoint
/// tree edges, meet only at their roots and reach the lower size window.
/// The only tree edges left out join the center to the roots of cut-off
/// subtrees.
fn check_split(tree: &SplitTree, res: &[SplitTree], center: VertexId, x: &[bool], w: &Windows) {
    let mut edges: Vec<(VertexId, VertexId)> = res.iter().flat_map(|t| t.edges.iter().copied()).collect();
    edges.sort_unstable();
    assert!(edges.windows(2).all(|p| p[0] != p[1]), "split trees share an edge");
    for e in &tree.edges {
        if edges.binary_search(e).is_err() {
            let other = if e.0 == center { e.1 } else { e.0 };
            assert!(e.0 == center || e.1 == center, "dropped edge away from the center");
            assert!(res.iter().any(|t| t.root == other), "dropped edge to a non-root");
        }
    }
    assert!(edges.iter().all(|e| tree.edges.binary_search(e).is_ok()), "split added an edge");
    let mut verts: Vec<VertexId> = res.iter().flat_map(|t| t.vertices.iter().copied()).collect();
    verts.sort_unstable();
    verts.dedup();
    assert_eq!(verts, tree.vertices, "split trees must cover the tree");
    let mut seen: HashMap<VertexId, usize> = HashMap::new();
    for t in res {
        for &v in &t.vertices {
            *seen.entry(v).or_insert(0) += 1;
        }
    }
    for (v, k) in seen {
        if k > 1 {
            assert!(res.iter().all(|t| t.root == v || t.vertices.binary_search(&v).is_err()), "shared non-root {}", v);
        }
    }
    for t in res {
        assert!(w.at_least_lo(t.measure(x)), "split tree below the lower window");
        assert!(t.vertices.len() < tree.vertices.len() || res.len() > 1, "split made no progress");
    }
}

fn induced_tree_from_forest(verts: &[VertexId], f: &Forest, coll: &Collection) -> SplitTree {
    let mut edges = Vec::new();
    let mut root = verts[0];
    for &v in verts {
        let p = f.parent[v][coll.slot_of(v, 0).unwrap()];
        if p == v {
            root = v;
        } else {
            edges.push((v.min(p), v.max(p)));
        }
    }
    make_tree(root, verts.to_vec(), edges)
}

type Components = (Vec<Vec<VertexId>>, Vec<(VertexId, u64)>);

/// Components of `part - removed` with their measures, computed by
/// component detection and part-wise sums. Returns the per-vertex component
/// labels and the (label, measure) pairs.
fn components(
    comm: &CommGraph,
    coll: &Collection,
    removed: &[bool],
    x: &[bool],
    sim: &SimConfig,
    stats: &mut RunStats,
) -> Result<Components, SepError> {
    let keep = |_: usize, a: VertexId, b: VertexId| !removed[a] && !removed[b];
    let (lab, s) = ccd(comm, coll, &keep, sim)?;
    stats.then(&s);
    let mut groups: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for v in coll.parts()[0].vertices.iter().copied() {
        if !removed[v] {
            groups.entry(lab[v][0]).or_default().push(v);
        }
    }
    if groups.is_empty() {
        return Ok((lab, vec![]));
    }
    let mut keys: Vec<VertexId> = groups.keys().copied().collect();
    keys.sort_unstable();
    let parts: Vec<Part> = keys.iter().map(|k| Part::induced(comm, &groups[k])).collect();
    let cc = Collection::new(comm, parts)?;
    let (f, s) = core_forest(comm, &cc, sim)?;
    stats.then(&s);
    let vals = cc.per_slot(|v, _| x[v] as u64);
    let (sums, s) = pa_on(comm, &cc, &f, &vals, AggOp::Sum, sim)?;
    stats.then(&s);
    let per = cc.per_part(&sums);
    Ok((lab, keys.into_iter().zip(per).collect()))
}

/// Heaviest component (ties to the smaller label) among `comps`, announced
/// to the whole part by one more aggregation.
fn heaviest(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    comps: &[(VertexId, u64)],
    sim: &SimConfig,
    stats: &mut RunStats,
) -> Result<Option<(VertexId, u64)>, SepError> {
    let n = comm.n() as u64;
    let mut key_of: HashMap<VertexId, u64> = HashMap::new();
    for &(l, m) in comps {
        key_of.insert(l, m * (n + 1) + (n - l as u64));
    }
    // Only the component leader contributes its key.
    let vals = coll.per_slot(|v, _| *key_of.get(&v).unwrap_or(&0));
    let (o, s) = pa_on(comm, coll, forest, &vals, AggOp::Max, sim)?;
    stats.then(&s);
    if comps.is_empty() {
        return Ok(None);
    }
    let best = coll.per_part(&o)[0];
    let l = (n - best % (n + 1)) as VertexId;
    Ok(Some((l, best / (n + 1))))
}

fn ceil_log2(n: usize) -> u64 {
    let mut b = 0;
    while (1usize << b) < n {
        b += 1;
    }
    b.max(1)
}

/// Balanced separator of a connected network with respect to the target
/// set `xs`.
pub fn find_balanced_separator(
    comm: &CommGraph,
    xs: &[VertexId],
    cfg: &SepConfig,
    seed: u64,
    sim: &SimConfig,
) -> Result<SepOutcome, SepError> {
    cfg.validate()?;
    let n = comm.n();
    if n == 0 || !comm.is_connected() {
        return Err(SepError::Disconnected);
    }
    let mut x = vec![false; n];
    xs.iter().for_each(|&v| x[v] = true);
    let mut rng = rng_from(seed);
    let mut stats = RunStats::default();
    let whole = Collection::whole(comm)?;
    let (gforest, s) = core_forest(comm, &whole, sim)?;
    stats.then(&s);
    let (mu, s) = pa_on(comm, &whole, &gforest, &whole.per_slot(|v, _| x[v] as u64), AggOp::Sum, sim)?;
    stats.then(&s);
    let mu_g = mu[0][0];
    let mut t: u64 = 2;
    let mut history = Vec::new();
    loop {
        history.push(t);
        // Step 1.
        if mu_g <= cfg.base_cutoff * t * t {
            let mut sep: Vec<VertexId> = (0..n).filter(|&v| x[v]).collect();
            sep.sort_unstable();
            return Ok(SepOutcome { separator: sep, t, path: SepPath::Target, t_history: history, stats });
        }
        let w = Windows::new(cfg, mu_g, t);
        let mut alive = vec![true; n];
        let mut rstar: BTreeSet<VertexId> = BTreeSet::new();
        let mut per_iter: Vec<Vec<SplitTree>> = Vec::new();
        let mut done = None;
        for i in 1..=cfg.iterations(t) {
            // Step 2: spanning tree of G_i, then repeated splitting.
            let verts: Vec<VertexId> = (0..n).filter(|&v| alive[v]).collect();
            let gi = Collection::new(comm, vec![Part::induced(comm, &verts)])?;
            let (fi, s) = core_forest(comm, &gi, sim)?;
            stats.then(&s);
            let tstar = induced_tree_from_forest(&verts, &fi, &gi);
            let mut work = Vec::new();
            let mut fin = Vec::new();
            if w.above_hi(tstar.measure(&x)) {
                work.push(tstar);
            } else {
                fin.push(tstar);
            }
            while !work.is_empty() {
                let (res, s) = split_all(comm, &work, &x, &w, sim)?;
                stats.then(&s);
                work.clear();
                for tr in res.into_iter().flatten() {
                    if w.above_hi(tr.measure(&x)) {
                        work.push(tr);
                    } else {
                        fin.push(tr);
                    }
                }
            }
            // Step 3: remove the roots and test the balance.
            let mut removed = vec![false; n];
            for tr in &fin {
                removed[tr.root] = true;
                rstar.insert(tr.root);
            }
            per_iter.push(fin);
            let (lab, comps) = components(comm, &gi, &removed, &x, sim, &mut stats)?;
            let top = heaviest(comm, &gi, &fi, &comps, sim, &mut stats)?;
            match top {
                Some((label, m)) if !cfg.balanced(m, mu_g) => {
                    for v in 0..n {
                        alive[v] = alive[v] && !removed[v] && lab[v].first() == Some(&label);
                    }
                }
                _ => {
                    done = Some(i);
                    break;
                }
            }
        }
        if let Some(iteration) = done {
            let sep: Vec<VertexId> = rstar.into_iter().collect();
            return Ok(SepOutcome { separator: sep, t, path: SepPath::RootSet { iteration }, t_history: history, stats });
        }
        // Step 4: sampled pairwise cuts.
        let (_, s) = gather_profiles(comm, &whole, &gforest, &per_iter, &x, sim)?;
        stats.then(&s);
        let attempts = cfg.trials * ceil_log2(n);
        for trial in 0..attempts {
            let mut pairs: Vec<(&SplitTree, &SplitTree)> = Vec::new();
            for trees in &per_iter {
                for _ in 0..cfg.pair_samples {
                    let a = rng.gen_range(0..trees.len());
                    let b = rng.gen_range(0..trees.len());
                    pairs.push((&trees[a], &trees[b]));
                }
            }
            // The leader announces the sampled pairs.
            let items = whole.per_slot(|v, _| {
                if v == 0 {
                    pairs
                        .iter()
                        .enumerate()
                        .map(|(j, (a, b))| {
                            let (ra, ma) = a.id();
                            let (rb, mb) = b.id();
                            let k = n as u64 + 1;
                            (j as u64, ra * k + ma, rb * k + mb)
                        })
                        .collect()
                } else {
                    vec![]
                }
            });
            let (_, s) = bct(comm, &whole, &gforest, 1, &items, sim)?;
            stats.then(&s);
            let live: Vec<&(&SplitTree, &SplitTree)> = pairs
                .iter()
                .filter(|(a, b)| a.vertices.iter().all(|v| b.vertices.binary_search(v).is_err()))
                .collect();
            let mut z: BTreeSet<VertexId> = BTreeSet::new();
            if !live.is_empty() {
                let flags = |tr: &SplitTree| -> Vec<Vec<bool>> {
                    let mut f = vec![vec![false]; n];
                    tr.vertices.iter().for_each(|&v| f[v][0] = true);
                    f
                };
                let xa: Vec<Vec<Vec<bool>>> = live.iter().map(|p| flags(p.0)).collect();
                let yb: Vec<Vec<Vec<bool>>> = live.iter().map(|p| flags(p.1)).collect();
                let (cuts, s) = mvc(comm, &whole, &gforest, t, &xa, &yb, sim)?;
                stats.then(&s);
                for c in cuts {
                    if let CutResult::Cut(vs) = &c[0] {
                        z.extend(vs.iter().copied());
                    }
                }
            }
            let mut removed = vec![false; n];
            z.iter().for_each(|&v| removed[v] = true);
            let (_, comps) = components(comm, &whole, &removed, &x, sim, &mut stats)?;
            let top = heaviest(comm, &whole, &gforest, &comps, sim, &mut stats)?;
            if top.is_none_or(|(_, m)| cfg.balanced(m, mu_g)) {
                return Ok(SepOutcome {
                    separator: z.into_iter().collect(),
                    t,
                    path: SepPath::Cuts { trial },
                    t_history: history,
                    stats,
                });
            }
        }
        t *= 2;
    }
}

/// Every split-tree root sends its profile towards the leader; charged as a
/// multi-source broadcast over the whole network.
fn gather_profiles(
    comm: &CommGraph,
    whole: &Collection,
    forest: &Forest,
    per_iter: &[Vec<SplitTree>],
    x: &[bool],
    sim: &SimConfig,
) -> Result<((), RunStats), SepError> {
    let mut items: Vec<Vec<Vec<(u64, u64, u64, u64)>>> = vec![vec![vec![]]; comm.n()];
    let mut sources = BTreeSet::new();
    for (i, trees) in per_iter.iter().enumerate() {
        for tr in trees {
            let (r, m) = tr.id();
            items[tr.root][0].push((i as u64 + 1, r, m, tr.measure(x)));
            sources.insert(tr.root);
        }
    }
    let (_, s) = bct(comm, whole, forest, sources.len().max(1), &items, sim)?;
    Ok(((), s))
}

/// Relabel the subgraph induced by `vertices` (sorted) to `0..k`.
pub fn induced_comm(comm: &CommGraph, vertices: &[VertexId]) -> CommGraph {
    let idx: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut pairs = Vec::new();
    for (i, &v) in vertices.iter().enumerate() {
        for &w in comm.neighbors(v) {
            if let Some(&j) = idx.get(&w) {
                if i < j {
                    pairs.push((i, j));
                }
            }
        }
    }
    CommGraph::from_edges(vertices.len(), pairs)
}

/// Separators of vertex-disjoint connected parts, each with its own target
/// set. The parts share no edge, so their runs are charged as concurrent
/// (rounds combine by maximum).
pub fn parallel_separators(
    comm: &CommGraph,
    parts: &[Vec<VertexId>],
    targets: &[Vec<VertexId>],
    cfg: &SepConfig,
    seed: u64,
    sim: &SimConfig,
) -> Result<(Vec<SepOutcome>, RunStats), SepError> {
    let mut outs = Vec::with_capacity(parts.len());
    let mut all = Vec::with_capacity(parts.len());
    let local_sim = SimConfig { id_universe: sim.id_universe.max(comm.n()), ..*sim };
    for (i, p) in parts.iter().enumerate() {
        let mut vs = p.clone();
        vs.sort_unstable();
        let sub = induced_comm(comm, &vs);
        let pos: HashMap<VertexId, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let local_x: Vec<VertexId> = targets[i].iter().map(|v| pos[v]).collect();
        let part_seed = seed ^ (vs[0] as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut o = find_balanced_separator(&sub, &local_x, cfg, part_seed, &local_sim)?;
        o.separator = o.separator.iter().map(|&v| vs[v]).collect();
        all.push(o.stats.clone());
        outs.push(o);
    }
    Ok((outs, RunStats::parallel(&all).labelled("separators")))
}
