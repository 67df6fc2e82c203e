//! Exact directed distance labels over a tree decomposition.
//!
//! For a bag `x`, let `D_x` be the vertices whose canonical string extends
//! `x`. The graph `G_x` has vertices `D_x ∪ B_x` and every edge with an
//! endpoint in `D_x`; `G_ψ = G`. Bottom-up, each bag vertex announces its
//! edges of the compressed graph `H_x` (on `B_x`: edges of `G_x` inside the
//! bag plus child distances) to all of `G_x`, so every member can compute
//! `d_{G_x}` on `B_x` locally. Top-down, members then turn these into exact
//! `G` distances from each bag to all ancestor bags, which is what the label
//! of a vertex consists of.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{dist_add, validate_on_comm, BagId, CommGraph, MultiGraph, TreeDecomposition, VertexId, INF};
use crate::primitives::{bct, core_forest, Collection, Part, PrimError};
use crate::separator::SepConfig;
use crate::sim::{RunStats, SimConfig};
use crate::treedecomp::{build_tree_decomposition, TdError, TdOutcome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("labels of {0} and {1} share no hub")]
    DisjointHubSets(VertexId, VertexId),
    #[error(transparent)]
    Prim(#[from] PrimError),
    #[error(transparent)]
    Decomposition(#[from] TdError),
    #[error("no valid decomposition after {0} attempts")]
    RetriesExhausted(u32),
}

/// `d(owner, v)` and `d(v, owner)` for every hub `v` in the union of the
/// bags on the path from the root to the owner's canonical bag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceLabel {
    pub owner: VertexId,
    /// Sorted.
    pub hubs: Vec<VertexId>,
    /// `fwd[i] = d(owner, hubs[i])`.
    pub fwd: Vec<u64>,
    /// `bwd[i] = d(hubs[i], owner)`.
    pub bwd: Vec<u64>,
}

impl DistanceLabel {
    /// All `(from, to, distance)` triples, sorted.
    pub fn triples(&self) -> Vec<(VertexId, VertexId, u64)> {
        let mut t: BTreeSet<(VertexId, VertexId, u64)> = BTreeSet::new();
        for (i, &h) in self.hubs.iter().enumerate() {
            t.insert((self.owner, h, self.fwd[i]));
            t.insert((h, self.owner, self.bwd[i]));
        }
        t.into_iter().collect()
    }

    /// One `from to distance` line per triple; infinity is written `inf`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (a, b, d) in self.triples() {
            if d == INF {
                writeln!(s, "{} {} inf", a, b).unwrap();
            } else {
                writeln!(s, "{} {} {}", a, b, d).unwrap();
            }
        }
        s
    }

    pub fn forward(&self, v: VertexId) -> Option<u64> {
        self.hubs.binary_search(&v).ok().map(|i| self.fwd[i])
    }

    pub fn backward(&self, v: VertexId) -> Option<u64> {
        self.hubs.binary_search(&v).ok().map(|i| self.bwd[i])
    }
}

/// `min over common hubs s of d(u, s) + d(s, v)`.
pub fn decode(lu: &DistanceLabel, lv: &DistanceLabel) -> Result<u64, LabelError> {
    let (mut i, mut j) = (0, 0);
    let mut best = INF;
    let mut met = false;
    while i < lu.hubs.len() && j < lv.hubs.len() {
        match lu.hubs[i].cmp(&lv.hubs[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                met = true;
                best = best.min(dist_add(lu.fwd[i], lv.bwd[j]));
                i += 1;
                j += 1;
            }
        }
    }
    if met {
        Ok(best)
    } else {
        Err(LabelError::DisjointHubSets(lu.owner, lv.owner))
    }
}

/// What the construction knew about one bag; kept for cross-checks.
#[derive(Clone, Debug)]
pub struct BagTrace {
    pub bag: Vec<VertexId>,
    /// `V(G_x)`, sorted.
    pub gx_vertices: Vec<VertexId>,
    /// Directed edges of `G_x` as `(tail, head, cost)`.
    pub gx_edges: Vec<(VertexId, VertexId, u64)>,
    /// Edges of `H_x` as learned through the broadcast.
    pub hx_edges: Vec<(VertexId, VertexId, u64)>,
    /// `d_{H_x}` on the bag, indexed like `bag`.
    pub m: Vec<Vec<u64>>,
    pub leaf: bool,
}

#[derive(Clone, Debug)]
pub struct DlOutcome {
    pub labels: Vec<DistanceLabel>,
    pub stats: RunStats,
    pub trace: HashMap<BagId, BagTrace>,
}

/// All-pairs shortest paths on `k` vertices by Floyd-Warshall.
fn local_apsp(k: usize, arcs: &[(usize, usize, u64)]) -> Vec<Vec<u64>> {
    let mut d = vec![vec![INF; k]; k];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b, c) in arcs {
        if c < d[a][b] {
            d[a][b] = c;
        }
    }
    for m in 0..k {
        for i in 0..k {
            let dim = d[i][m];
            if dim == INF {
                continue;
            }
            for j in 0..k {
                let via = dist_add(dim, d[m][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn components(vertices: &[VertexId], edges: &[(VertexId, VertexId)]) -> Vec<Vec<VertexId>> {
    let idx: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, idx[&u]), find(&mut parent, idx[&v]));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<VertexId>> = Default::default();
    for (i, &v) in vertices.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

type Triple = (u64, u64, u64);

/// Broadcast `items[part][v]` within each part. Parts of one level form a
/// near-disjoint collection; should validation fail, they are served one
/// after another instead.
fn broadcast_parts(
    comm: &CommGraph,
    parts: Vec<Part>,
    items: &[HashMap<VertexId, Vec<Triple>>],
    sim: &SimConfig,
) -> Result<(Vec<Vec<Triple>>, RunStats), LabelError> {
    if parts.is_empty() {
        return Ok((vec![], RunStats::default()));
    }
    let run = |coll: &Collection, its: &[HashMap<VertexId, Vec<Triple>>]| -> Result<(Vec<Vec<Triple>>, RunStats), LabelError> {
        let (f, mut stats) = core_forest(comm, coll, sim)?;
        let per = coll.per_slot(|v, p| its[p].get(&v).cloned().unwrap_or_default());
        let h = coll.parts().iter().enumerate().map(|(p, _)| its[p].len()).max().unwrap_or(1).max(1);
        let (out, s) = bct(comm, coll, &f, h, &per, sim)?;
        stats.then(&s);
        // What the first member of every part received.
        let got = (0..coll.num_parts())
            .map(|p| {
                let v = coll.parts()[p].vertices[0];
                out[v][coll.slot_of(v, p).unwrap()].clone()
            })
            .collect();
        Ok((got, stats))
    };
    match Collection::new(comm, parts.clone()) {
        Ok(coll) => run(&coll, items),
        Err(_) => {
            let mut all = Vec::new();
            let mut stats = RunStats::default();
            for (p, part) in parts.into_iter().enumerate() {
                let coll = Collection::new(comm, vec![part])?;
                let (mut g, s) = run(&coll, std::slice::from_ref(&items[p]))?;
                stats.then(&s);
                all.push(g.pop().unwrap());
            }
            Ok((all, stats))
        }
    }
}

/// Exact-distance forward/backward tables from one bag to every ancestor bag.
struct UpTable {
    id: BagId,
    bag: Vec<VertexId>,
    /// Union of bags from the root down to this bag, sorted.
    up: Vec<VertexId>,
    /// `fwd[a][j] = d_G(bag[a], up[j])`.
    fwd: Vec<Vec<u64>>,
    /// `bwd[a][j] = d_G(up[j], bag[a])`.
    bwd: Vec<Vec<u64>>,
}

impl UpTable {
    fn up_index(&self, v: VertexId) -> usize {
        self.up.binary_search(&v).unwrap()
    }
    fn bag_index(&self, v: VertexId) -> usize {
        self.bag.binary_search(&v).unwrap()
    }
}

/// Distance labels for every vertex of `g`, built over `td`.
pub fn build_labels(g: &MultiGraph, td: &TreeDecomposition, sim: &SimConfig) -> Result<DlOutcome, LabelError> {
    let comm = g.comm_graph();
    let n = g.n();
    let rep = validate_on_comm(&comm, td);
    if !rep.valid {
        return Err(LabelError::InvalidDecomposition(rep.violations.join("; ")));
    }
    let st: Vec<BagId> = td.canonical_strings(n).into_iter().map(|s| s.unwrap()).collect();
    // D_x membership: v lies in D_x for every prefix x of St(v).
    let mut d_of: HashMap<BagId, Vec<VertexId>> = HashMap::new();
    for (v, s) in st.iter().enumerate() {
        for l in 0..=s.len() {
            d_of.entry(s[..l].to_vec()).or_default().push(v);
        }
    }
    let in_d = |x: &[usize], v: VertexId| st[v].starts_with(x);

    let mut by_level: Vec<Vec<BagId>> = vec![Vec::new(); td.depth() + 1];
    for id in td.ids() {
        by_level[id.len()].push(id.clone());
    }

    let mut trace: HashMap<BagId, BagTrace> = HashMap::new();
    let mut stats = RunStats::default();
    for level in (0..by_level.len()).rev() {
        let mut parts = Vec::new();
        let mut items = Vec::new();
        let mut owners = Vec::new();
        let mut pending: Vec<BagTrace> = Vec::new();
        for x in &by_level[level] {
            let bag = td.bag(x).unwrap().to_vec();
            let dx = d_of.get(x).cloned().unwrap_or_default();
            let mut vs: BTreeSet<VertexId> = dx.iter().copied().collect();
            vs.extend(bag.iter().copied());
            let gx_vertices: Vec<VertexId> = vs.into_iter().collect();
            let mut gx_edges = Vec::new();
            let mut comm_edges = BTreeSet::new();
            for &u in &gx_vertices {
                for a in g.out_arcs(u) {
                    let w = a.other;
                    if in_d(x, u) || in_d(x, w) {
                        gx_edges.push((u, w, a.cost));
                        if u != w {
                            comm_edges.insert((u.min(w), u.max(w)));
                        }
                    }
                }
            }
            // H_x edges owned by their tail, as (tail, head, cost).
            let mut best: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
            let in_bag = |v: VertexId| bag.binary_search(&v).is_ok();
            for &(u, w, c) in &gx_edges {
                if u != w && in_bag(u) && in_bag(w) {
                    let e = best.entry((u, w)).or_insert(INF);
                    *e = (*e).min(c);
                }
            }
            let children = td.children(x);
            for &ci in &children {
                let mut cid = x.clone();
                cid.push(ci);
                let ct = &trace[&cid];
                for (i, &a) in ct.bag.iter().enumerate() {
                    if !in_bag(a) {
                        continue;
                    }
                    for (j, &b) in ct.bag.iter().enumerate() {
                        if a != b && in_bag(b) && ct.m[i][j] != INF {
                            let e = best.entry((a, b)).or_insert(INF);
                            *e = (*e).min(ct.m[i][j]);
                        }
                    }
                }
            }
            let comm_edges: Vec<(VertexId, VertexId)> = comm_edges.into_iter().collect();
            for comp in components(&gx_vertices, &comm_edges) {
                if comp.len() == 1 {
                    continue;
                }
                let mut its: HashMap<VertexId, Vec<Triple>> = HashMap::new();
                for (&(a, b), &c) in &best {
                    if comp.binary_search(&a).is_ok() {
                        its.entry(a).or_default().push((a as u64, b as u64, c));
                    }
                }
                let cedges: Vec<(VertexId, VertexId)> =
                    comm_edges.iter().copied().filter(|e| comp.binary_search(&e.0).is_ok()).collect();
                parts.push(Part { vertices: comp, edges: cedges });
                items.push(its);
                owners.push(pending.len());
            }
            pending.push(BagTrace {
                bag,
                gx_vertices,
                gx_edges,
                hx_edges: Vec::new(),
                m: Vec::new(),
                leaf: children.is_empty(),
            });
        }
        let (got, s) = broadcast_parts(&comm, parts, &items, sim)?;
        stats.then(&s);
        for (p, recv) in got.into_iter().enumerate() {
            let t = &mut pending[owners[p]];
            t.hx_edges.extend(recv.into_iter().map(|(a, b, c)| (a as VertexId, b as VertexId, c)));
        }
        for (x, mut t) in by_level[level].iter().zip(pending) {
            t.hx_edges.sort_unstable();
            let arcs: Vec<(usize, usize, u64)> = t
                .hx_edges
                .iter()
                .map(|&(a, b, c)| (t.bag.binary_search(&a).unwrap(), t.bag.binary_search(&b).unwrap(), c))
                .collect();
            t.m = local_apsp(t.bag.len(), &arcs);
            trace.insert(x.clone(), t);
        }
    }

    // Top-down, local at every member: exact distances to ancestor bags.
    let mut labels: Vec<Option<DistanceLabel>> = vec![None; n];
    let mut owned: HashMap<BagId, Vec<VertexId>> = HashMap::new();
    for (v, s) in st.iter().enumerate() {
        owned.entry(s.clone()).or_default().push(v);
    }
    let mut stack: Vec<UpTable> = Vec::new();
    for (id, bag) in td.iter() {
        while stack.last().is_some_and(|t| !id.starts_with(&t.id)) {
            stack.pop();
        }
        let m = &trace[id].m;
        let tab = match stack.last() {
            None => UpTable { id: id.clone(), bag: bag.clone(), up: bag.clone(), fwd: m.clone(), bwd: transpose(m) },
            Some(par) => descend(par, id, bag, m, &|v| in_d(id, v)),
        };
        if let Some(vs) = owned.get(id) {
            for &u in vs {
                let a = tab.bag_index(u);
                labels[u] = Some(DistanceLabel {
                    owner: u,
                    hubs: tab.up.clone(),
                    fwd: tab.fwd[a].clone(),
                    bwd: tab.bwd[a].clone(),
                });
            }
        }
        stack.push(tab);
    }
    Ok(DlOutcome {
        labels: labels.into_iter().map(|l| l.unwrap()).collect(),
        stats: stats.labelled("distance_labels"),
        trace,
    })
}

fn transpose(m: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = m.len();
    (0..k).map(|j| (0..k).map(|i| m[i][j]).collect()).collect()
}

/// Child table from the parent's. Paths leaving `G_y` pass through the
/// boundary `B_y \ D_y`, which lies in the parent bag.
fn descend(par: &UpTable, id: &BagId, bag: &[VertexId], m: &[Vec<u64>], in_dy: &dyn Fn(VertexId) -> bool) -> UpTable {
    let k = bag.len();
    let bd: Vec<usize> = (0..k).filter(|&i| !in_dy(bag[i])).collect();
    // Exact distances inside the bag: stay in G_y or detour via the rest.
    let dg = |s: usize, t: usize| par.fwd[par.bag_index(bag[s])][par.up_index(bag[t])];
    let mut e = m.to_vec();
    if !bd.is_empty() {
        let mut via = vec![vec![INF; bd.len()]; k];
        for a in 0..k {
            for (j, &t) in bd.iter().enumerate() {
                via[a][j] = bd.iter().map(|&s| dist_add(m[a][s], dg(s, t))).min().unwrap();
            }
        }
        for a in 0..k {
            for b in 0..k {
                let alt = bd.iter().enumerate().map(|(j, &t)| dist_add(via[a][j], m[t][b])).min().unwrap();
                if alt < e[a][b] {
                    e[a][b] = alt;
                }
            }
        }
    }
    let mut up: BTreeSet<VertexId> = par.up.iter().copied().collect();
    up.extend(bag.iter().copied());
    let up: Vec<VertexId> = up.into_iter().collect();
    let mut fwd = vec![vec![INF; up.len()]; k];
    let mut bwd = vec![vec![INF; up.len()]; k];
    for (j, &b) in up.iter().enumerate() {
        if let Ok(bi) = bag.binary_search(&b) {
            for a in 0..k {
                fwd[a][j] = e[a][bi];
                bwd[a][j] = e[bi][a];
            }
        } else {
            let pj = par.up_index(b);
            for a in 0..k {
                for &s in &bd {
                    let ps = par.bag_index(bag[s]);
                    fwd[a][j] = fwd[a][j].min(dist_add(e[a][s], par.fwd[ps][pj]));
                    bwd[a][j] = bwd[a][j].min(dist_add(par.bwd[ps][pj], e[s][a]));
                }
            }
        }
    }
    UpTable { id: id.clone(), bag: bag.to_vec(), up, fwd, bwd }
}

/// Single-source distances: the source's label is broadcast to everyone,
/// and every vertex decodes against its own label.
pub fn sssp_from(
    g: &MultiGraph,
    td: &TreeDecomposition,
    source: VertexId,
    sim: &SimConfig,
) -> Result<(Vec<u64>, RunStats), LabelError> {
    let dl = build_labels(g, td, sim)?;
    let mut stats = dl.stats.clone();
    let s = broadcast_label(g, &dl.labels[source], sim)?;
    stats.then(&s);
    let ls = &dl.labels[source];
    let out = dl.labels.iter().map(|lv| decode(ls, lv)).collect::<Result<Vec<_>, _>>()?;
    Ok((out, stats))
}

/// Cost of sending one label to every vertex over per-component BFS trees.
pub fn broadcast_label(g: &MultiGraph, l: &DistanceLabel, sim: &SimConfig) -> Result<RunStats, LabelError> {
    let comm = g.comm_graph();
    let mut items: Vec<Triple> = Vec::new();
    for (i, &h) in l.hubs.iter().enumerate() {
        items.push((h as u64, l.fwd[i], l.bwd[i]));
    }
    let all: Vec<VertexId> = (0..g.n()).collect();
    let comm_edges: Vec<(VertexId, VertexId)> = comm.edges().collect();
    let comps = components(&all, &comm_edges);
    let parts: Vec<Part> = comps.iter().map(|c| Part::induced(&comm, c)).collect();
    let its: Vec<HashMap<VertexId, Vec<Triple>>> = comps
        .iter()
        .map(|c| {
            let mut m = HashMap::new();
            if c.binary_search(&l.owner).is_ok() {
                m.insert(l.owner, items.clone());
            }
            m
        })
        .collect();
    let (_, s) = broadcast_parts(&comm, parts, &its, sim)?;
    Ok(s.labelled("label_broadcast"))
}


/// Decomposition plus labels for one graph.
#[derive(Clone, Debug)]
pub struct Labelled {
    pub td: TdOutcome,
    pub dl: DlOutcome,
    /// Decompositions rejected by the validator before this one.
    pub retries: u32,
    /// Decomposition followed by labelling.
    pub stats: RunStats,
}

/// Build a decomposition and labels on it, rebuilding with a fresh seed
/// whenever the validator rejects the decomposition.
pub fn label_graph(
    g: &MultiGraph,
    cfg: &SepConfig,
    seed: u64,
    sim: &SimConfig,
    max_attempts: u32,
) -> Result<Labelled, LabelError> {
    let comm = g.comm_graph();
    let mut stats = RunStats::default();
    for attempt in 0..max_attempts {
        let s = seed.wrapping_add(attempt as u64);
        let td = build_tree_decomposition(g, cfg, s, sim)?;
        stats.then(&td.stats);
        if !validate_on_comm(&comm, &td.td).valid {
            continue;
        }
        let dl = build_labels(g, &td.td, sim)?;
        stats.then(&dl.stats);
        return Ok(Labelled { td, dl, retries: attempt, stats: stats.labelled("labelling") });
    }
    Err(LabelError::RetriesExhausted(max_attempts))
}
