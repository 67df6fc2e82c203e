//! Graph types: the weighted multigraph input, the derived communication
//! network, and tree decompositions with their validator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type BagId = Vec<usize>;

/// Distance / cost sentinel. Absorbing under [`dist_add`].
pub const INF: u64 = u64::MAX;

#[inline]
pub fn dist_add(a: u64, b: u64) -> u64 {
    if a == INF || b == INF {
        INF
    } else {
        a.saturating_add(b).min(INF - 1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge {edge} has endpoint {vertex} outside 0..{n}")]
    BadEndpoint { edge: EdgeId, vertex: VertexId, n: usize },
    #[error("vertex {0} appears in no bag")]
    NotInAnyBag(VertexId),
    #[error("invalid generator parameters: {0}")]
    BadParameters(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cost: u64,
}

/// An arc as seen from one endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub edge: EdgeId,
    pub other: VertexId,
    pub cost: u64,
}

/// Weighted multigraph. Vertices are `0..n`, edge ids are `0..m`.
/// Undirected edges are traversable in both directions.
#[derive(Clone, Debug)]
pub struct MultiGraph {
    n: usize,
    directed: bool,
    edges: Vec<Edge>,
    out: Vec<Vec<Arc>>,
    inc: Vec<Vec<Arc>>,
}

impl PartialEq for MultiGraph {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.directed == o.directed && self.edges == o.edges
    }
}
impl Eq for MultiGraph {}

impl MultiGraph {
    pub fn new(n: usize, directed: bool, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (i, e) in edges.iter().enumerate() {
            for x in [e.u, e.v] {
                if x >= n {
                    return Err(GraphError::BadEndpoint { edge: i, vertex: x, n });
                }
            }
        }
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.u].push(Arc { edge: i, other: e.v, cost: e.cost });
            inc[e.v].push(Arc { edge: i, other: e.u, cost: e.cost });
            if !directed && e.u != e.v {
                out[e.v].push(Arc { edge: i, other: e.u, cost: e.cost });
                inc[e.u].push(Arc { edge: i, other: e.v, cost: e.cost });
            }
        }
        Ok(MultiGraph { n, directed, edges, out, inc })
    }

    pub fn from_pairs(n: usize, directed: bool, pairs: &[(VertexId, VertexId, u64)]) -> Self {
        let edges = pairs.iter().map(|&(u, v, cost)| Edge { u, v, cost }).collect();
        MultiGraph::new(n, directed, edges).expect("endpoints in range")
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }
    pub fn is_directed(&self) -> bool {
        self.directed
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }
    /// Arcs leaving `v` (both orientations of an undirected edge).
    pub fn out_arcs(&self, v: VertexId) -> &[Arc] {
        &self.out[v]
    }
    /// Arcs entering `v`.
    pub fn in_arcs(&self, v: VertexId) -> &[Arc] {
        &self.inc[v]
    }

    /// Same topology, new costs.
    pub fn with_costs(&self, costs: &[u64]) -> MultiGraph {
        let edges = self
            .edges
            .iter()
            .zip(costs)
            .map(|(e, &c)| Edge { cost: c, ..*e })
            .collect();
        MultiGraph::new(self.n, self.directed, edges).unwrap()
    }

    pub fn max_finite_cost(&self) -> u64 {
        self.edges.iter().map(|e| e.cost).filter(|&c| c != INF).max().unwrap_or(0)
    }

    pub fn comm_graph(&self) -> CommGraph {
        derive_comm_graph(self)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let dir = if self.directed { "directed" } else { "undirected" };
        writeln!(s, "{} {} {}", self.n, self.edges.len(), dir).unwrap();
        for (i, e) in self.edges.iter().enumerate() {
            if e.cost == INF {
                writeln!(s, "{} {} {} inf", i, e.u, e.v).unwrap();
            } else {
                writeln!(s, "{} {} {} {}", i, e.u, e.v, e.cost).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let perr = |line: usize, msg: &str| GraphError::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(perr(hl + 1, "header must be `n m directed|undirected`"));
        }
        let n: usize = h[0].parse().map_err(|_| perr(hl + 1, "bad n"))?;
        let m: usize = h[1].parse().map_err(|_| perr(hl + 1, "bad m"))?;
        let directed = match h[2] {
            "directed" | "1" | "true" => true,
            "undirected" | "0" | "false" => false,
            _ => return Err(perr(hl + 1, "bad directed flag")),
        };
        let mut edges = Vec::with_capacity(m);
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(perr(ln + 1, "edge line must be `edge_id u v weight`"));
            }
            let id: usize = f[0].parse().map_err(|_| perr(ln + 1, "bad edge id"))?;
            if id != edges.len() {
                return Err(perr(ln + 1, "edge ids must be 0..m in order"));
            }
            let u = f[1].parse().map_err(|_| perr(ln + 1, "bad u"))?;
            let v = f[2].parse().map_err(|_| perr(ln + 1, "bad v"))?;
            let cost = if f[3] == "inf" {
                INF
            } else {
                f[3].parse().map_err(|_| perr(ln + 1, "bad weight"))?
            };
            edges.push(Edge { u, v, cost });
        }
        if edges.len() != m {
            return Err(perr(0, "edge count does not match header"));
        }
        MultiGraph::new(n, directed, edges)
    }
}

/// Simple undirected graph used as the communication network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommGraph {
    adj: Vec<Vec<VertexId>>,
}

impl CommGraph {
    pub fn from_edges(n: usize, pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in pairs {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        CommGraph { adj }
    }
    pub fn n(&self) -> usize {
        self.adj.len()
    }
    pub fn m(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, a)| a.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Hop distances from `s`; `usize::MAX` for unreachable.
    pub fn bfs(&self, s: VertexId) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n()];
        let mut q = VecDeque::new();
        d[s] = 0;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if d[v] == usize::MAX {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
            }
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// Diameter, or `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n() {
            for &d in &self.bfs(s) {
                if d == usize::MAX {
                    return None;
                }
                best = best.max(d);
            }
        }
        Some(best)
    }

    /// Component label (minimum vertex id) of every vertex in `mask`;
    /// vertices outside the mask get `usize::MAX`.
    pub fn components_within(&self, mask: &[bool]) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n()];
        for s in 0..self.n() {
            if !mask[s] || comp[s] != usize::MAX {
                continue;
            }
            comp[s] = s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if mask[v] && comp[v] == usize::MAX {
                        comp[v] = s;
                        stack.push(v);
                    }
                }
            }
        }
        comp
    }
}

/// Drop orientations, merge parallel edges, remove self-loops.
pub fn derive_comm_graph(g: &MultiGraph) -> CommGraph {
    CommGraph::from_edges(g.n(), g.edges().iter().map(|e| (e.u, e.v)))
}

/// `μ_X(Y) = |Y ∩ X|`.
#[derive(Clone, Debug)]
pub struct WeightedMeasure {
    target: Vec<bool>,
}

impl WeightedMeasure {
    pub fn new(n: usize, x: &[VertexId]) -> Self {
        let mut target = vec![false; n];
        for &v in x {
            target[v] = true;
        }
        WeightedMeasure { target }
    }
    pub fn contains(&self, v: VertexId) -> bool {
        self.target[v]
    }
    pub fn weight(&self, v: VertexId) -> u64 {
        self.target[v] as u64
    }
    pub fn measure<'a>(&self, ys: impl IntoIterator<Item = &'a VertexId>) -> u64 {
        ys.into_iter().filter(|&&v| self.target[v]).count() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TreeDecomposition {
    bags: BTreeMap<BagId, Vec<VertexId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub width: i64,
    pub depth: usize,
    pub violations: Vec<String>,
}

pub fn fmt_bag_id(x: &[usize]) -> String {
    if x.is_empty() {
        "ψ".to_string()
    } else {
        x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".")
    }
}

impl TreeDecomposition {
    pub fn new() -> Self {
        TreeDecomposition { bags: BTreeMap::new() }
    }

    pub fn single_bag(n: usize) -> Self {
        let mut td = TreeDecomposition::new();
        td.insert(vec![], (0..n).collect());
        td
    }

    pub fn insert(&mut self, id: BagId, mut bag: Vec<VertexId>) {
        bag.sort_unstable();
        bag.dedup();
        self.bags.insert(id, bag);
    }

    pub fn bag(&self, id: &[usize]) -> Option<&[VertexId]> {
        self.bags.get(id).map(|b| b.as_slice())
    }

    pub fn ids(&self) -> impl Iterator<Item = &BagId> {
        self.bags.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BagId, &Vec<VertexId>)> {
        self.bags.iter()
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// Child characters of `x`, ascending.
    pub fn children(&self, x: &[usize]) -> Vec<usize> {
        let mut lo = x.to_vec();
        lo.push(0);
        self.bags
            .range(lo..)
            .take_while(|(k, _)| k.starts_with(x))
            .filter(|(k, _)| k.len() == x.len() + 1)
            .map(|(k, _)| k[x.len()])
            .collect()
    }

    pub fn width(&self) -> i64 {
        self.bags.values().map(|b| b.len() as i64).max().unwrap_or(0) - 1
    }

    pub fn depth(&self) -> usize {
        self.bags.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    /// Shortest bag id whose bag contains `v`.
    pub fn canonical_string(&self, v: VertexId) -> Result<BagId, GraphError> {
        self.bags
            .iter()
            .filter(|(_, b)| b.binary_search(&v).is_ok())
            .min_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(b.0)))
            .map(|(k, _)| k.clone())
            .ok_or(GraphError::NotInAnyBag(v))
    }

    /// Canonical strings of all vertices `0..n` (None when absent).
    pub fn canonical_strings(&self, n: usize) -> Vec<Option<BagId>> {
        let mut st: Vec<Option<BagId>> = vec![None; n];
        for (k, b) in &self.bags {
            for &v in b {
                if v < n {
                    let better = match &st[v] {
                        None => true,
                        Some(cur) => k.len() < cur.len() || (k.len() == cur.len() && k < cur),
                    };
                    if better {
                        st[v] = Some(k.clone());
                    }
                }
            }
        }
        st
    }

    /// Union of bags on all prefixes of `canonical_string(v)`.
    pub fn upward_bags(&self, v: VertexId) -> Result<Vec<VertexId>, GraphError> {
        let st = self.canonical_string(v)?;
        let mut out = BTreeSet::new();
        for l in 0..=st.len() {
            if let Some(b) = self.bags.get(&st[..l]) {
                out.extend(b.iter().copied());
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Replace every vertex `v` by `v*q .. v*q+q-1`.
    pub fn lift(&self, q: usize) -> TreeDecomposition {
        let mut td = TreeDecomposition::new();
        for (k, b) in &self.bags {
            td.insert(k.clone(), b.iter().flat_map(|&v| (0..q).map(move |i| v * q + i)).collect());
        }
        td
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, b) in &self.bags {
            let id = k.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".");
            let vs = b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            if vs.is_empty() {
                writeln!(s, "{} :", id).unwrap();
            } else {
                writeln!(s, "{} : {}", id, vs).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut td = TreeDecomposition::new();
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (id, vs) = line.split_once(':').ok_or(GraphError::Parse {
                line: ln + 1,
                msg: "expected `bag_id : vertices`".into(),
            })?;
            let id = id.trim();
            let key: BagId = if id.is_empty() {
                vec![]
            } else {
                id.split('.')
                    .map(|c| c.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| GraphError::Parse { line: ln + 1, msg: "bad bag id".into() })?
            };
            let bag = vs
                .split_whitespace()
                .map(|v| v.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| GraphError::Parse { line: ln + 1, msg: "bad vertex".into() })?;
            td.insert(key, bag);
        }
        Ok(td)
    }
}

/// Check conditions (a) vertex coverage, (b) edge coverage and
/// (c) connectivity of occurrences, plus prefix-closure of bag ids.
pub fn validate_tree_decomposition(g: &MultiGraph, td: &TreeDecomposition) -> ValidationReport {
    validate_pairs(g.n(), g.edges().iter().map(|e| (e.u, e.v)), td)
}

pub fn validate_on_comm(c: &CommGraph, td: &TreeDecomposition) -> ValidationReport {
    validate_pairs(c.n(), c.edges(), td)
}

fn validate_pairs(
    n: usize,
    pairs: impl Iterator<Item = (VertexId, VertexId)>,
    td: &TreeDecomposition,
) -> ValidationReport {
    let mut violations = Vec::new();
    if !td.bags.is_empty() && !td.bags.contains_key(&Vec::new()) {
        violations.push("missing root bag ψ".to_string());
    }
    for k in td.bags.keys() {
        if !k.is_empty() && !td.bags.contains_key(&k[..k.len() - 1]) {
            violations.push(format!("bag {} has no parent", fmt_bag_id(k)));
        }
    }
    let ids: Vec<&BagId> = td.bags.keys().collect();
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (_, b)) in td.bags.iter().enumerate() {
        for &v in b {
            if v >= n {
                violations.push(format!("bag {} contains unknown vertex {}", fmt_bag_id(ids[i]), v));
            } else {
                occ[v].push(i);
            }
        }
    }
    for (v, o) in occ.iter().enumerate() {
        if o.is_empty() {
            violations.push(format!("(a) vertex {} in no bag", v));
        }
    }
    for (u, v) in pairs {
        if u == v {
            continue;
        }
        let (a, b) = (&occ[u], &occ[v]);
        let (mut i, mut j, mut hit) = (0, 0, false);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    hit = true;
                    break;
                }
            }
        }
        if !hit {
            violations.push(format!("(b) edge ({},{}) uncovered", u, v));
        }
    }
    // (c): within a rooted tree, a node set is connected iff exactly one
    // member has its parent outside the set.
    for (v, o) in occ.iter().enumerate() {
        if o.len() <= 1 {
            continue;
        }
        let set: BTreeSet<&BagId> = o.iter().map(|&i| ids[i]).collect();
        let tops = set
            .iter()
            .filter(|k| k.is_empty() || !set.contains(&k[..k.len() - 1].to_vec()))
            .count();
        if tops != 1 {
            violations.push(format!("(c) bags containing {} are not connected", v));
        }
    }
    ValidationReport {
        valid: violations.is_empty(),
        width: td.width(),
        depth: td.depth(),
        violations,
    }
}
