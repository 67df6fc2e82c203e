//! Part-wise communication primitives over near-disjoint collections of
//! connected subgraphs: aggregation, spanning trees, subtree sums, leader
//! election, component detection, pipelined broadcast and bounded vertex
//! cuts.
//!
//! Aggregation runs on a BFS forest of each part's core (the vertices that
//! belong to no other part) with the shared boundary vertices hanging off
//! as leaves, so its cost tracks the part diameter.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::graph::{CommGraph, VertexId, INF};
use crate::sim::{run_many, value_bits, Message, NodeProgram, Outbox, RunStats, SimConfig, SimError, Status};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrimError {
    #[error("invalid collection: {0}")]
    InvalidCollection(String),
    #[error("part {0} is not a tree")]
    NotATree(usize),
    #[error("part {0} has no candidate")]
    NoCandidate(usize),
    #[error("part {part} has {count} sources, more than {h}")]
    TooManySources { part: usize, count: usize, h: usize },
    #[error("instance {instance} in part {part}: X and Y overlap")]
    InvalidPair { instance: usize, part: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A part given by its vertices and its (undirected) edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Part {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl Part {
    /// The subgraph of `comm` induced by `vertices`.
    pub fn induced(comm: &CommGraph, vertices: &[VertexId]) -> Part {
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        let mut edges = Vec::new();
        for &u in &vs {
            for &w in comm.neighbors(u) {
                if u < w && vs.binary_search(&w).is_ok() {
                    edges.push((u, w));
                }
            }
        }
        Part { vertices: vs, edges }
    }
}

#[derive(Clone, Debug)]
pub struct Slot {
    pub part: usize,
    pub core: bool,
    /// Neighbors over part edges, sorted.
    pub nbrs: Vec<VertexId>,
}

/// A validated near-disjoint collection. Every vertex keeps one slot per
/// part it belongs to; each communication edge belongs to at most one part.
#[derive(Clone, Debug)]
pub struct Collection {
    n: usize,
    /// Whether the near-disjointness and core conditions were verified.
    strict: bool,
    parts: Vec<Part>,
    slots: Vec<Vec<Slot>>,
    nbr_slot: Vec<Vec<(VertexId, u32)>>,
}

impl Collection {
    pub fn new(comm: &CommGraph, parts: Vec<Part>) -> Result<Collection, PrimError> {
        Collection::build(comm, parts, true)
    }

    /// Edge-disjoint connected parts that may share arbitrary vertices, such
    /// as trees meeting at their roots. Tree operations ([`rst`], [`sta`],
    /// [`tree_aggregate`], [`bct`] on an [`rst`] forest) work on these; core
    /// aggregation does not.
    pub fn edge_disjoint(comm: &CommGraph, parts: Vec<Part>) -> Result<Collection, PrimError> {
        Collection::build(comm, parts, false)
    }

    fn build(comm: &CommGraph, parts: Vec<Part>, strict: bool) -> Result<Collection, PrimError> {
        let n = comm.n();
        let mut parts = parts;
        let mut count = vec![0usize; n];
        for (i, p) in parts.iter_mut().enumerate() {
            p.vertices.sort_unstable();
            p.vertices.dedup();
            if p.vertices.is_empty() {
                return Err(PrimError::InvalidCollection(format!("part {} is empty", i)));
            }
            for e in p.edges.iter_mut() {
                if e.0 > e.1 {
                    *e = (e.1, e.0);
                }
            }
            p.edges.sort_unstable();
            p.edges.dedup();
            for &v in &p.vertices {
                if v >= n {
                    return Err(PrimError::InvalidCollection(format!("vertex {} out of range", v)));
                }
                count[v] += 1;
            }
            for &(a, b) in &p.edges {
                if !comm.has_edge(a, b) {
                    return Err(PrimError::InvalidCollection(format!("({},{}) is not a network edge", a, b)));
                }
                if p.vertices.binary_search(&a).is_err() || p.vertices.binary_search(&b).is_err() {
                    return Err(PrimError::InvalidCollection(format!("edge ({},{}) leaves part {}", a, b, i)));
                }
            }
        }
        let mut slots: Vec<Vec<Slot>> = vec![Vec::new(); n];
        for (i, p) in parts.iter().enumerate() {
            let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
            for &(a, b) in &p.edges {
                if strict && count[a] > 1 && count[b] > 1 {
                    return Err(PrimError::InvalidCollection(format!(
                        "edge ({},{}) of part {} has both endpoints shared",
                        a, b, i
                    )));
                }
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
            for &v in &p.vertices {
                let mut nb = adj.remove(&v).unwrap_or_default();
                nb.sort_unstable();
                slots[v].push(Slot { part: i, core: count[v] == 1, nbrs: nb });
            }
            let core: Vec<VertexId> = p.vertices.iter().copied().filter(|&v| count[v] == 1).collect();
            if !connected_within(&p.vertices, &p.edges, |_| true) {
                return Err(PrimError::InvalidCollection(format!("part {} is disconnected", i)));
            }
            if !strict {
                continue;
            }
            if core.is_empty() && p.vertices.len() > 1 {
                return Err(PrimError::InvalidCollection(format!("part {} has an empty core", i)));
            }
            if !core.is_empty() && !connected_within(&core, &p.edges, |v| count[v] == 1) {
                return Err(PrimError::InvalidCollection(format!("core of part {} is disconnected", i)));
            }
        }
        let mut nbr_slot = vec![Vec::new(); n];
        for v in 0..n {
            for (s, sl) in slots[v].iter().enumerate() {
                for &w in &sl.nbrs {
                    nbr_slot[v].push((w, s as u32));
                }
            }
            nbr_slot[v].sort_unstable();
            if nbr_slot[v].windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(PrimError::InvalidCollection(format!("an edge at {} lies in two parts", v)));
            }
        }
        Ok(Collection { n, strict, parts, slots, nbr_slot })
    }

    /// One part covering the whole network.
    pub fn whole(comm: &CommGraph) -> Result<Collection, PrimError> {
        let vs: Vec<VertexId> = (0..comm.n()).collect();
        Collection::new(comm, vec![Part { vertices: vs, edges: comm.edges().collect() }])
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn parts(&self) -> &[Part] {
        &self.parts
    }
    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }
    pub fn slots(&self, v: VertexId) -> &[Slot] {
        &self.slots[v]
    }
    pub fn slot_of(&self, v: VertexId, part: usize) -> Option<usize> {
        self.slots[v].iter().position(|s| s.part == part)
    }
    /// Slot through which neighbor `w` talks to `v`.
    fn slot_for(&self, v: VertexId, w: VertexId) -> Option<usize> {
        let ns = &self.nbr_slot[v];
        ns.binary_search_by_key(&w, |x| x.0).ok().map(|i| ns[i].1 as usize)
    }

    /// Build per-vertex per-slot data from a function of (vertex, part).
    pub fn per_slot<T>(&self, mut f: impl FnMut(VertexId, usize) -> T) -> Vec<Vec<T>> {
        (0..self.n).map(|v| self.slots[v].iter().map(|s| f(v, s.part)).collect()).collect()
    }

    /// Read a per-part value from any member (all members agree).
    pub fn per_part<T: Clone>(&self, vals: &[Vec<T>]) -> Vec<T> {
        (0..self.parts.len())
            .map(|i| {
                let v = self.parts[i].vertices[0];
                vals[v][self.slot_of(v, i).unwrap()].clone()
            })
            .collect()
    }
}

fn connected_within(vs: &[VertexId], edges: &[(VertexId, VertexId)], keep: impl Fn(VertexId) -> bool) -> bool {
    if vs.len() <= 1 {
        return true;
    }
    let idx: HashMap<VertexId, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![Vec::new(); vs.len()];
    for &(a, b) in edges {
        if keep(a) && keep(b) {
            if let (Some(&i), Some(&j)) = (idx.get(&a), idx.get(&b)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut seen = vec![false; vs.len()];
    seen[0] = true;
    let mut stack = vec![0];
    let mut c = 1;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                c += 1;
                stack.push(w);
            }
        }
    }
    c == vs.len()
}

/// Rooted spanning forest: one tree per part, stored per vertex per slot.
#[derive(Clone, Debug)]
pub struct Forest {
    /// `parent[v][slot]`; a root is its own parent.
    pub parent: Vec<Vec<VertexId>>,
    pub children: Vec<Vec<Vec<VertexId>>>,
    pub roots: Vec<VertexId>,
}

impl Forest {
    pub fn depth(&self, coll: &Collection) -> usize {
        let mut best = 0;
        for v in 0..coll.n() {
            for s in 0..coll.slots(v).len() {
                let part = coll.slots(v)[s].part;
                let (mut u, mut d) = (v, 0);
                while self.parent[u][coll.slot_of(u, part).unwrap()] != u {
                    u = self.parent[u][coll.slot_of(u, part).unwrap()];
                    d += 1;
                }
                best = best.max(d);
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Wave {
    root: u64,
    dist: u64,
}

impl Message for Wave {
    fn bits(&self, _: usize) -> usize {
        value_bits(self.root) + value_bits(self.dist)
    }
}

/// Flood of (root, distance) pairs; every vertex keeps the lexicographically
/// smallest pair and the neighbor that supplied it.
struct PartBfs<'a> {
    coll: &'a Collection,
    candidate: &'a [Vec<bool>],
    core_only: bool,
}

impl PartBfs<'_> {
    fn allowed(&self, v: VertexId, s: usize, w: VertexId) -> bool {
        !self.core_only || (self.coll.slots[v][s].core && self.coll.slots[w].len() == 1)
    }
}

impl NodeProgram for PartBfs<'_> {
    type State = (Vec<Option<(u64, u64, VertexId)>>, Vec<bool>);
    type Msg = Wave;
    type Output = Vec<Option<(u64, u64, VertexId)>>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let k = self.coll.slots[v].len();
        let mut best = vec![None; k];
        let mut fresh = vec![false; k];
        for s in 0..k {
            if self.candidate[v][s] {
                best[s] = Some((v as u64, 0, v));
                fresh[s] = true;
            }
        }
        let st = if fresh.iter().any(|&f| f) { Status::Active } else { Status::Idle };
        ((best, fresh), st)
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Wave)],
        out: &mut Outbox<Wave>,
    ) -> Status {
        let (best, fresh) = st;
        for &(w, m) in inbox {
            let s = self.coll.slot_for(v, w).unwrap();
            let cand = (m.root, m.dist + 1, w);
            let better = match best[s] {
                None => true,
                Some(b) => cand < b,
            };
            if better {
                if best[s].map(|b| (b.0, b.1)) != Some((cand.0, cand.1)) {
                    fresh[s] = true;
                }
                best[s] = Some(cand);
            }
        }
        for s in 0..best.len() {
            if !fresh[s] {
                continue;
            }
            fresh[s] = false;
            let (root, dist, _) = best[s].unwrap();
            for &w in &self.coll.slots[v][s].nbrs {
                if self.allowed(v, s, w) {
                    out.send(w, Wave { root, dist });
                }
            }
        }
        Status::Idle
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        st.0.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ping;

impl Message for Ping {
    fn bits(&self, _: usize) -> usize {
        1
    }
}

/// Every non-root tells its parent; parents learn their children.
struct Notify<'a> {
    coll: &'a Collection,
    parent: &'a [Vec<VertexId>],
}

impl NodeProgram for Notify<'_> {
    type State = Vec<Vec<VertexId>>;
    type Msg = Ping;
    type Output = Vec<Vec<VertexId>>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let k = self.coll.slots[v].len();
        let st = if (0..k).any(|s| self.parent[v][s] != v) { Status::Active } else { Status::Idle };
        (vec![Vec::new(); k], st)
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Ping)],
        out: &mut Outbox<Ping>,
    ) -> Status {
        if inbox.is_empty() {
            for &p in &self.parent[v] {
                if p != v {
                    out.send(p, Ping);
                }
            }
        }
        for &(w, _) in inbox {
            let s = self.coll.slot_for(v, w).unwrap();
            st[s].push(w);
        }
        Status::Idle
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        let mut st = st.clone();
        for c in st.iter_mut() {
            c.sort_unstable();
        }
        st
    }
}

fn forest_from_bfs(
    comm: &CommGraph,
    coll: &Collection,
    candidate: &[Vec<bool>],
    core_only: bool,
    cfg: &SimConfig,
) -> Result<(Forest, RunStats), PrimError> {
    let prog = PartBfs { coll, candidate, core_only };
    let (outs, mut stats) = run_many(comm, std::slice::from_ref(&prog), "bfs", cfg)?;
    let best = &outs[0];
    let n = coll.n();
    let mut parent = vec![Vec::new(); n];
    let mut roots = vec![usize::MAX; coll.num_parts()];
    for v in 0..n {
        for (s, sl) in coll.slots[v].iter().enumerate() {
            let p = match best[v][s] {
                Some((r, _, p)) => {
                    if p == v {
                        roots[sl.part] = r as usize;
                    }
                    p
                }
                None if core_only && !sl.core => {
                    // Boundary vertex: leaf under its smallest core neighbor.
                    *sl.nbrs.iter().find(|&&w| coll.slots[w].len() == 1).unwrap_or(&v)
                }
                None => v,
            };
            if p == v && best[v][s].is_none() {
                roots[sl.part] = v;
            }
            parent[v].push(p);
        }
    }
    let notify = Notify { coll, parent: &parent };
    let (c, st2) = run_many(comm, std::slice::from_ref(&notify), "notify", cfg)?;
    stats.then(&st2);
    let children = c.into_iter().next().unwrap();
    Ok((Forest { parent, children, roots }, stats.labelled("forest")))
}

/// BFS forest of every core from its smallest vertex, boundary vertices
/// attached as leaves.
pub fn core_forest(comm: &CommGraph, coll: &Collection, cfg: &SimConfig) -> Result<(Forest, RunStats), PrimError> {
    if !coll.strict {
        return Err(PrimError::InvalidCollection("core forest needs a near-disjoint collection".into()));
    }
    let cand = coll.per_slot(|v, p| {
        let s = coll.slot_of(v, p).unwrap();
        coll.slots[v][s].core || coll.parts[p].vertices.len() == 1
    });
    forest_from_bfs(comm, coll, &cand, true, cfg)
}

/// Rooted spanning tree of each part (over all part edges) from given roots.
pub fn rst(
    comm: &CommGraph,
    coll: &Collection,
    roots: &[VertexId],
    cfg: &SimConfig,
) -> Result<(Forest, RunStats), PrimError> {
    if roots.len() != coll.num_parts() {
        return Err(PrimError::InvalidCollection("one root per part required".into()));
    }
    for (i, &r) in roots.iter().enumerate() {
        if coll.parts[i].vertices.binary_search(&r).is_err() {
            return Err(PrimError::InvalidCollection(format!("root {} not in part {}", r, i)));
        }
    }
    let cand = coll.per_slot(|v, p| roots[p] == v);
    forest_from_bfs(comm, coll, &cand, false, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggOp {
    Sum,
    Min,
    Max,
}

impl AggOp {
    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            AggOp::Sum => a.saturating_add(b),
            AggOp::Min => a.min(b),
            AggOp::Max => a.max(b),
        }
    }
    pub fn identity(self) -> u64 {
        match self {
            AggOp::Sum => 0,
            AggOp::Min => INF,
            AggOp::Max => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AggMsg {
    Up(u64),
    Down(u64),
}

impl Message for AggMsg {
    fn bits(&self, _: usize) -> usize {
        1 + match self {
            AggMsg::Up(x) | AggMsg::Down(x) => value_bits(*x),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Agg {
    /// Aggregate over the vertex's subtree.
    pub sub: u64,
    /// Aggregate over the whole tree, if broadcast.
    pub total: Option<u64>,
}

struct TreeAgg<'a> {
    coll: &'a Collection,
    forest: &'a Forest,
    values: &'a [Vec<u64>],
    op: AggOp,
    broadcast: bool,
}

struct AggState {
    pending: Vec<usize>,
    acc: Vec<u64>,
    sent: Vec<bool>,
    out: Vec<Agg>,
}

impl NodeProgram for TreeAgg<'_> {
    type State = AggState;
    type Msg = AggMsg;
    type Output = Vec<Agg>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let k = self.coll.slots[v].len();
        let pending: Vec<usize> = (0..k).map(|s| self.forest.children[v][s].len()).collect();
        let st = if pending.contains(&0) { Status::Active } else { Status::Idle };
        let acc = self.values[v].clone();
        (AggState { pending, acc, sent: vec![false; k], out: vec![Agg::default(); k] }, st)
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, AggMsg)],
        out: &mut Outbox<AggMsg>,
    ) -> Status {
        for &(w, m) in inbox {
            let s = self.coll.slot_for(v, w).unwrap();
            match m {
                AggMsg::Up(x) => {
                    st.acc[s] = self.op.apply(st.acc[s], x);
                    st.pending[s] -= 1;
                }
                AggMsg::Down(x) => {
                    st.out[s].total = Some(x);
                    for &c in &self.forest.children[v][s] {
                        out.send(c, AggMsg::Down(x));
                    }
                }
            }
        }
        for s in 0..st.acc.len() {
            if st.sent[s] || st.pending[s] > 0 {
                continue;
            }
            st.sent[s] = true;
            st.out[s].sub = st.acc[s];
            let p = self.forest.parent[v][s];
            if p == v {
                if self.broadcast {
                    st.out[s].total = Some(st.acc[s]);
                    for &c in &self.forest.children[v][s] {
                        out.send(c, AggMsg::Down(st.acc[s]));
                    }
                }
            } else {
                out.send(p, AggMsg::Up(st.acc[s]));
            }
        }
        Status::Idle
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        st.out.clone()
    }
}

/// Convergecast (and optional broadcast) on a forest. Several aggregations
/// over the same forest run multiplexed.
pub fn tree_aggregate_many(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    values: &[Vec<Vec<u64>>],
    op: AggOp,
    broadcast: bool,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<Vec<Agg>>>, RunStats), PrimError> {
    let progs: Vec<TreeAgg> =
        values.iter().map(|vals| TreeAgg { coll, forest, values: vals, op, broadcast }).collect();
    let (outs, stats) = run_many(comm, &progs, "aggregate", cfg)?;
    Ok((outs, stats.labelled("aggregate")))
}

pub fn tree_aggregate(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    values: &[Vec<u64>],
    op: AggOp,
    broadcast: bool,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<Agg>>, RunStats), PrimError> {
    let (mut o, s) = tree_aggregate_many(comm, coll, forest, &[values.to_vec()], op, broadcast, cfg)?;
    Ok((o.pop().unwrap(), s))
}

/// Part-wise aggregation on a previously built core forest: every member of
/// every part learns the aggregate of its part.
pub fn pa_on(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    values: &[Vec<u64>],
    op: AggOp,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<u64>>, RunStats), PrimError> {
    let (o, s) = tree_aggregate(comm, coll, forest, values, op, true, cfg)?;
    Ok((o.into_iter().map(|r| r.into_iter().map(|a| a.total.unwrap()).collect()).collect(), s.labelled("pa")))
}

/// Several part-wise aggregations multiplexed on one forest.
pub fn pa_many(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    values: &[Vec<Vec<u64>>],
    op: AggOp,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<Vec<u64>>>, RunStats), PrimError> {
    let (o, s) = tree_aggregate_many(comm, coll, forest, values, op, true, cfg)?;
    let res = o
        .into_iter()
        .map(|x| x.into_iter().map(|r| r.into_iter().map(|a| a.total.unwrap()).collect()).collect())
        .collect();
    Ok((res, s.labelled("pa")))
}

/// Part-wise aggregation including forest construction.
pub fn pa(
    comm: &CommGraph,
    coll: &Collection,
    values: &[Vec<u64>],
    op: AggOp,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<u64>>, RunStats), PrimError> {
    let (f, mut stats) = core_forest(comm, coll, cfg)?;
    let (o, s) = pa_on(comm, coll, &f, values, op, cfg)?;
    stats.then(&s);
    Ok((o, stats.labelled("pa")))
}

/// Subtree aggregation on parts that are trees rooted at `roots`.
pub fn sta(
    comm: &CommGraph,
    coll: &Collection,
    roots: &[VertexId],
    values: &[Vec<u64>],
    op: AggOp,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<u64>>, RunStats), PrimError> {
    for (i, p) in coll.parts.iter().enumerate() {
        if p.edges.len() + 1 != p.vertices.len() {
            return Err(PrimError::NotATree(i));
        }
    }
    let (f, mut stats) = rst(comm, coll, roots, cfg)?;
    let (o, s) = tree_aggregate(comm, coll, &f, values, op, false, cfg)?;
    stats.then(&s);
    Ok((o.into_iter().map(|r| r.into_iter().map(|a| a.sub).collect()).collect(), stats.labelled("sta")))
}

/// Leader election: smallest candidate id per part.
pub fn sle_on(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    candidate: &[Vec<bool>],
    cfg: &SimConfig,
) -> Result<(Vec<VertexId>, RunStats), PrimError> {
    let vals: Vec<Vec<u64>> = (0..coll.n())
        .map(|v| candidate[v].iter().map(|&c| if c { v as u64 } else { INF }).collect())
        .collect();
    let (o, s) = pa_on(comm, coll, forest, &vals, AggOp::Min, cfg)?;
    let per = coll.per_part(&o);
    let mut res = Vec::with_capacity(per.len());
    for (i, x) in per.into_iter().enumerate() {
        if x == INF {
            return Err(PrimError::NoCandidate(i));
        }
        res.push(x as VertexId);
    }
    Ok((res, s.labelled("sle")))
}

pub fn sle(
    comm: &CommGraph,
    coll: &Collection,
    candidate: &[Vec<bool>],
    cfg: &SimConfig,
) -> Result<(Vec<VertexId>, RunStats), PrimError> {
    let (f, mut stats) = core_forest(comm, coll, cfg)?;
    let (r, s) = sle_on(comm, coll, &f, candidate, cfg)?;
    stats.then(&s);
    Ok((r, stats.labelled("sle")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Label(u64);

impl Message for Label {
    fn bits(&self, _: usize) -> usize {
        value_bits(self.0)
    }
}

struct Ccd<'a> {
    coll: &'a Collection,
    keep: &'a dyn Fn(usize, VertexId, VertexId) -> bool,
}

impl NodeProgram for Ccd<'_> {
    type State = (Vec<u64>, Vec<bool>);
    type Msg = Label;
    type Output = Vec<VertexId>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let k = self.coll.slots[v].len();
        ((vec![v as u64; k], vec![true; k]), Status::Active)
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Label)],
        out: &mut Outbox<Label>,
    ) -> Status {
        let (lab, fresh) = st;
        for &(w, Label(x)) in inbox {
            let s = self.coll.slot_for(v, w).unwrap();
            if x < lab[s] {
                lab[s] = x;
                fresh[s] = true;
            }
        }
        for s in 0..lab.len() {
            if !fresh[s] {
                continue;
            }
            fresh[s] = false;
            let part = self.coll.slots[v][s].part;
            for &w in &self.coll.slots[v][s].nbrs {
                if (self.keep)(part, v, w) {
                    out.send(w, Label(lab[s]));
                }
            }
        }
        Status::Idle
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        st.0.iter().map(|&x| x as VertexId).collect()
    }
}

/// Connected components of the subgraph of each part formed by the part
/// edges `(u, v)` with `keep(part, u, v)`; `keep` must be symmetric. Each
/// vertex outputs the smallest id in its component, per slot.
pub fn ccd(
    comm: &CommGraph,
    coll: &Collection,
    keep: &dyn Fn(usize, VertexId, VertexId) -> bool,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<VertexId>>, RunStats), PrimError> {
    let prog = Ccd { coll, keep };
    let (mut o, s) = run_many(comm, std::slice::from_ref(&prog), "ccd", cfg)?;
    Ok((o.pop().unwrap(), s.labelled("ccd")))
}

/// Payload broadcast by [`bct`].
pub trait Item: Clone + Ord {
    fn bits(&self, id_bits: usize) -> usize;
}

impl Item for u64 {
    fn bits(&self, _: usize) -> usize {
        value_bits(*self)
    }
}

impl Item for (u64, u64) {
    fn bits(&self, _: usize) -> usize {
        value_bits(self.0) + value_bits(self.1)
    }
}

impl Item for (u64, u64, u64) {
    fn bits(&self, _: usize) -> usize {
        value_bits(self.0) + value_bits(self.1) + value_bits(self.2)
    }
}

impl Item for (u64, u64, u64, u64) {
    fn bits(&self, _: usize) -> usize {
        value_bits(self.0) + value_bits(self.1) + value_bits(self.2) + value_bits(self.3)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pack<T>(Vec<T>);

impl<T: Item> Message for Pack<T> {
    fn bits(&self, idb: usize) -> usize {
        1 + value_bits(self.0.len() as u64) + self.0.iter().map(|x| x.bits(idb)).sum::<usize>()
    }
}

struct Bct<'a, T> {
    coll: &'a Collection,
    forest: &'a Forest,
    items: &'a [Vec<Vec<T>>],
    limit: usize,
}

struct BctState<T> {
    known: Vec<BTreeSet<T>>,
    up: Vec<VecDeque<T>>,
    down: Vec<VecDeque<T>>,
}

impl<T: Item> Bct<'_, T> {
    fn take(&self, q: &mut VecDeque<T>, idb: usize) -> Vec<T> {
        let mut used = 1 + 7 + 12;
        let mut out = Vec::new();
        while let Some(x) = q.front() {
            let b = x.bits(idb);
            if used + b > self.limit && !out.is_empty() {
                break;
            }
            used += b;
            out.push(q.pop_front().unwrap());
        }
        out
    }
}

impl<T: Item> NodeProgram for Bct<'_, T> {
    type State = BctState<T>;
    type Msg = Pack<T>;
    type Output = Vec<Vec<T>>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let k = self.coll.slots[v].len();
        let mut st = BctState {
            known: vec![BTreeSet::new(); k],
            up: vec![VecDeque::new(); k],
            down: vec![VecDeque::new(); k],
        };
        let mut any = false;
        for s in 0..k {
            let root = self.forest.parent[v][s] == v;
            for x in &self.items[v][s] {
                if st.known[s].insert(x.clone()) {
                    any = true;
                    if root {
                        st.down[s].push_back(x.clone());
                    } else {
                        st.up[s].push_back(x.clone());
                    }
                }
            }
        }
        (st, if any { Status::Active } else { Status::Idle })
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Pack<T>)],
        out: &mut Outbox<Pack<T>>,
    ) -> Status {
        let idb = crate::sim::id_bits(self.coll.n());
        for (w, Pack(xs)) in inbox {
            let s = self.coll.slot_for(v, *w).unwrap();
            let from_parent = self.forest.parent[v][s] == *w && self.forest.parent[v][s] != v;
            let root = self.forest.parent[v][s] == v;
            for x in xs {
                if from_parent {
                    st.known[s].insert(x.clone());
                    st.down[s].push_back(x.clone());
                } else if st.known[s].insert(x.clone()) {
                    if root {
                        st.down[s].push_back(x.clone());
                    } else {
                        st.up[s].push_back(x.clone());
                    }
                }
            }
        }
        let mut busy = false;
        for s in 0..st.known.len() {
            if !st.up[s].is_empty() {
                let batch = self.take(&mut st.up[s], idb);
                out.send(self.forest.parent[v][s], Pack(batch));
            }
            if !st.down[s].is_empty() {
                let batch = self.take(&mut st.down[s], idb);
                for &c in &self.forest.children[v][s] {
                    out.send(c, Pack(batch.clone()));
                }
            }
            busy |= !st.up[s].is_empty() || !st.down[s].is_empty();
        }
        if busy {
            Status::Active
        } else {
            Status::Idle
        }
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        st.known.iter().map(|k| k.iter().cloned().collect()).collect()
    }
}

/// Pipelined broadcast: every member of a part learns all items placed at
/// that part's sources. `items[v][slot]` are the items originating at `v`;
/// a part may have at most `h` sources.
pub fn bct<T: Item>(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    h: usize,
    items: &[Vec<Vec<T>>],
    cfg: &SimConfig,
) -> Result<(Vec<Vec<Vec<T>>>, RunStats), PrimError> {
    let mut sources = vec![0usize; coll.num_parts()];
    for v in 0..coll.n() {
        for (s, sl) in coll.slots[v].iter().enumerate() {
            if !items[v][s].is_empty() {
                sources[sl.part] += 1;
            }
        }
    }
    for (part, &count) in sources.iter().enumerate() {
        if count > h {
            return Err(PrimError::TooManySources { part, count, h });
        }
    }
    let prog = Bct { coll, forest, items, limit: cfg.limit(coll.n()) };
    let (mut o, s) = run_many(comm, std::slice::from_ref(&prog), "bct", cfg)?;
    Ok((o.pop().unwrap(), s.labelled("bct")))
}

// ---------------------------------------------------------------------------
// Bounded vertex cuts via augmenting paths on the vertex-split part.

/// Per vertex, per slot flow state of one cut instance.
#[derive(Clone, Debug, Default)]
struct FlowMem {
    inx: bool,
    iny: bool,
    /// Flow through the vertex (in to out).
    thru: u64,
    /// Flow on `v_out -> w_in` for each part neighbor `w`, aligned with `nbrs`.
    out_f: Vec<u64>,
    /// Flow on `w_out -> v_in`.
    in_f: Vec<u64>,
    flow: u64,
    done: bool,
    cut: Option<bool>,
}

impl FlowMem {
    fn cap_inf(&self) -> bool {
        self.inx || self.iny
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum From {
    Source,
    Internal,
    Arc(VertexId),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Reach {
    r_in: Option<From>,
    r_out: Option<From>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Flags {
    out_reached: bool,
    in_reached: bool,
}

impl Message for Flags {
    fn bits(&self, _: usize) -> usize {
        2
    }
}

struct Residual<'a> {
    coll: &'a Collection,
    mem: &'a [Vec<FlowMem>],
}

impl Residual<'_> {
    fn close(&self, m: &FlowMem, r: &mut Reach) {
        loop {
            let mut changed = false;
            if r.r_in.is_some() && r.r_out.is_none() && (m.cap_inf() || m.thru < 1) {
                r.r_out = Some(From::Internal);
                changed = true;
            }
            if r.r_out.is_some() && r.r_in.is_none() && m.thru > 0 {
                r.r_in = Some(From::Internal);
                changed = true;
            }
            if !changed {
                break;
            }
        }
    }
}

impl NodeProgram for Residual<'_> {
    type State = (Vec<Reach>, Vec<Reach>);
    type Msg = Flags;
    type Output = Vec<Reach>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let k = self.coll.slots[v].len();
        let mut r = vec![Reach::default(); k];
        let mut any = false;
        for s in 0..k {
            let m = &self.mem[v][s];
            if !m.done && m.inx {
                r[s].r_in = Some(From::Source);
                self.close(m, &mut r[s]);
                any = true;
            }
        }
        let sent = vec![Reach::default(); k];
        ((r, sent), if any { Status::Active } else { Status::Idle })
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Flags)],
        out: &mut Outbox<Flags>,
    ) -> Status {
        let (r, sent) = st;
        for &(w, f) in inbox {
            let s = self.coll.slot_for(v, w).unwrap();
            let m = &self.mem[v][s];
            if m.done {
                continue;
            }
            let i = self.coll.slots[v][s].nbrs.binary_search(&w).unwrap();
            if f.out_reached && r[s].r_in.is_none() {
                r[s].r_in = Some(From::Arc(w));
            }
            if f.in_reached && r[s].r_out.is_none() && m.out_f[i] > 0 {
                r[s].r_out = Some(From::Arc(w));
            }
            self.close(m, &mut r[s]);
        }
        for s in 0..r.len() {
            let newly_out = r[s].r_out.is_some() && sent[s].r_out.is_none();
            let newly_in = r[s].r_in.is_some() && sent[s].r_in.is_none();
            if !(newly_out || newly_in) {
                continue;
            }
            sent[s] = r[s];
            for &w in &self.coll.slots[v][s].nbrs {
                out.send(w, Flags { out_reached: newly_out, in_reached: newly_in });
            }
        }
        Status::Idle
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        st.0.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trace {
    /// The sender's in-half was reached from the receiver's out-half.
    Forward,
    /// The sender's out-half was reached backwards from the receiver's in-half.
    Backward,
}

impl Message for Trace {
    fn bits(&self, _: usize) -> usize {
        1
    }
}

struct Augment<'a> {
    coll: &'a Collection,
    mem: &'a [Vec<FlowMem>],
    reach: &'a [Vec<Reach>],
    /// Chosen sink per part, if any.
    target: &'a [Option<VertexId>],
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Half {
    In,
    Out,
}

impl Augment<'_> {
    /// Walk the local part of the augmenting path starting at `half` and
    /// return the message to pass on, if any.
    fn walk(&self, v: VertexId, s: usize, m: &mut FlowMem, mut half: Half) -> Option<(VertexId, Trace)> {
        let r = self.reach[v][s];
        loop {
            match half {
                Half::Out => match r.r_out.unwrap() {
                    From::Internal => {
                        m.thru += 1;
                        half = Half::In;
                    }
                    From::Arc(w) => {
                        let i = self.coll.slots[v][s].nbrs.binary_search(&w).unwrap();
                        m.out_f[i] -= 1;
                        return Some((w, Trace::Backward));
                    }
                    From::Source => unreachable!(),
                },
                Half::In => match r.r_in.unwrap() {
                    From::Source => return None,
                    From::Internal => {
                        m.thru -= 1;
                        half = Half::Out;
                    }
                    From::Arc(w) => {
                        let i = self.coll.slots[v][s].nbrs.binary_search(&w).unwrap();
                        m.in_f[i] += 1;
                        return Some((w, Trace::Forward));
                    }
                },
            }
        }
    }
}

impl NodeProgram for Augment<'_> {
    type State = Vec<FlowMem>;
    type Msg = Trace;
    type Output = Vec<FlowMem>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        let mem = self.mem[v].clone();
        let start = self.coll.slots[v].iter().any(|sl| self.target[sl.part] == Some(v));
        (mem, if start { Status::Active } else { Status::Idle })
    }

    fn round(
        &self,
        v: VertexId,
        _: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Trace)],
        out: &mut Outbox<Trace>,
    ) -> Status {
        if inbox.is_empty() {
            for s in 0..st.len() {
                if self.target[self.coll.slots[v][s].part] == Some(v) {
                    if let Some((w, t)) = self.walk(v, s, &mut st[s], Half::Out) {
                        out.send(w, t);
                    }
                }
            }
        }
        for &(w, t) in inbox {
            let s = self.coll.slot_for(v, w).unwrap();
            let i = self.coll.slots[v][s].nbrs.binary_search(&w).unwrap();
            let half = match t {
                Trace::Forward => {
                    st[s].out_f[i] += 1;
                    Half::Out
                }
                Trace::Backward => {
                    st[s].in_f[i] -= 1;
                    Half::In
                }
            };
            if let Some((x, t2)) = self.walk(v, s, &mut st[s], half) {
                out.send(x, t2);
            }
        }
        Status::Idle
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        st.clone()
    }
}

/// Outcome of one cut instance in one part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutResult {
    /// A separating vertex set of size at most `t`, sorted.
    Cut(Vec<VertexId>),
    /// The minimum cut exceeds `t` (possibly infinite).
    TooLarge,
}

/// Bounded X-Y vertex cuts. `xs[j][v][slot]`, `ys[j][v][slot]` describe
/// instance `j`; all instances run multiplexed. Results are indexed
/// `[instance][part]`.
pub fn mvc(
    comm: &CommGraph,
    coll: &Collection,
    forest: &Forest,
    t: u64,
    xs: &[Vec<Vec<bool>>],
    ys: &[Vec<Vec<bool>>],
    cfg: &SimConfig,
) -> Result<(Vec<Vec<CutResult>>, RunStats), PrimError> {
    let h = xs.len();
    let n = coll.n();
    let mut mems: Vec<Vec<Vec<FlowMem>>> = Vec::with_capacity(h);
    for j in 0..h {
        let mut mem = Vec::with_capacity(n);
        for v in 0..n {
            let mut row = Vec::new();
            for (s, sl) in coll.slots[v].iter().enumerate() {
                let (x, y) = (xs[j][v][s], ys[j][v][s]);
                if x && y {
                    return Err(PrimError::InvalidPair { instance: j, part: sl.part });
                }
                let d = sl.nbrs.len();
                row.push(FlowMem { inx: x, iny: y, out_f: vec![0; d], in_f: vec![0; d], ..Default::default() });
            }
            mem.push(row);
        }
        mems.push(mem);
    }
    let mut stats = RunStats::default();
    loop {
        let live: Vec<usize> = (0..h).filter(|&j| (0..n).any(|v| mems[j][v].iter().any(|m| !m.done))).collect();
        if live.is_empty() {
            break;
        }
        let progs: Vec<Residual> = live.iter().map(|&j| Residual { coll, mem: &mems[j] }).collect();
        let (reaches, s1) = run_many(comm, &progs, "mvc-flood", cfg)?;
        stats.then(&s1);
        let vals: Vec<Vec<Vec<u64>>> = live
            .iter()
            .zip(&reaches)
            .map(|(&j, r)| {
                (0..n)
                    .map(|v| {
                        (0..coll.slots[v].len())
                            .map(|s| {
                                let m = &mems[j][v][s];
                                if !m.done && m.iny && r[v][s].r_out.is_some() {
                                    v as u64
                                } else {
                                    INF
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let (mins, s2) = pa_many(comm, coll, forest, &vals, AggOp::Min, cfg)?;
        stats.then(&s2);
        let mut targets: Vec<Vec<Option<VertexId>>> = Vec::with_capacity(live.len());
        for (li, &j) in live.iter().enumerate() {
            let mut tg = vec![None; coll.num_parts()];
            for v in 0..n {
                for s in 0..coll.slots[v].len() {
                    let m = &mut mems[j][v][s];
                    if m.done {
                        continue;
                    }
                    let y = mins[li][v][s];
                    if y == INF {
                        m.done = true;
                        let r = reaches[li][v][s];
                        m.cut = Some(r.r_in.is_some() && r.r_out.is_none());
                    } else {
                        m.flow += 1;
                        if m.flow > t {
                            m.done = true;
                            m.cut = None;
                        } else {
                            tg[coll.slots[v][s].part] = Some(y as VertexId);
                        }
                    }
                }
            }
            targets.push(tg);
        }
        if targets.iter().all(|tg| tg.iter().all(|x| x.is_none())) {
            continue;
        }
        let progs: Vec<Augment> = live
            .iter()
            .enumerate()
            .map(|(li, &j)| Augment { coll, mem: &mems[j], reach: &reaches[li], target: &targets[li] })
            .collect();
        let (newmem, s3) = run_many(comm, &progs, "mvc-augment", cfg)?;
        stats.then(&s3);
        drop(progs);
        for (li, &j) in live.iter().enumerate() {
            mems[j] = newmem[li].clone();
        }
    }
    let mut res = Vec::with_capacity(h);
    for mem in &mems {
        let mut per = Vec::with_capacity(coll.num_parts());
        for (i, p) in coll.parts.iter().enumerate() {
            let v0 = p.vertices[0];
            let s0 = coll.slot_of(v0, i).unwrap();
            if mem[v0][s0].cut.is_none() {
                per.push(CutResult::TooLarge);
                continue;
            }
            let cut: Vec<VertexId> = p
                .vertices
                .iter()
                .copied()
                .filter(|&v| mem[v][coll.slot_of(v, i).unwrap()].cut == Some(true))
                .collect();
            per.push(CutResult::Cut(cut));
        }
        res.push(per);
    }
    Ok((res, stats.labelled("mvc")))
}
