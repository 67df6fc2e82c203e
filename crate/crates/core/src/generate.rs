//! Instance generators: random partial k-trees (with a witness
//! decomposition of width k) and small deterministic families.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{BagId, Edge, GraphError, MultiGraph, TreeDecomposition, VertexId};

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generated graph together with a decomposition witnessing its treewidth bound.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: MultiGraph,
    pub witness: TreeDecomposition,
}

#[derive(Clone, Debug)]
pub struct KTreeOptions {
    pub directed: bool,
    /// Always keep one attachment edge per new vertex, so the result is connected.
    pub connected: bool,
    /// Directed only: probability that a kept edge also gets its reverse.
    pub antiparallel_prob: f64,
    /// Keep only edges across a BFS-parity bipartition.
    pub bipartite: bool,
}

impl Default for KTreeOptions {
    fn default() -> Self {
        KTreeOptions { directed: false, connected: false, antiparallel_prob: 0.0, bipartite: false }
    }
}

/// Random k-tree on `n` vertices; every edge is then kept with probability `keep_prob`.
pub fn generate_partial_ktree(
    n: usize,
    k: usize,
    keep_prob: f64,
    weights: RangeInclusive<u64>,
    seed: u64,
) -> Result<Instance, GraphError> {
    generate_partial_ktree_with(n, k, keep_prob, weights, seed, &KTreeOptions::default())
}

pub fn generate_partial_ktree_with(
    n: usize,
    k: usize,
    keep_prob: f64,
    weights: RangeInclusive<u64>,
    seed: u64,
    opts: &KTreeOptions,
) -> Result<Instance, GraphError> {
    if n == 0 || k >= n {
        return Err(GraphError::BadParameters(format!("need 0 <= k < n, got n={} k={}", n, k)));
    }
    if !(0.0..=1.0).contains(&keep_prob) {
        return Err(GraphError::BadParameters(format!("keep_prob {} outside [0,1]", keep_prob)));
    }
    if weights.is_empty() {
        return Err(GraphError::BadParameters("empty weight range".into()));
    }
    let mut rng = rng_from(seed);
    let mut label: Vec<VertexId> = (0..n).collect();
    label.shuffle(&mut rng);

    // (edge, forced) pairs in construction order, on construction indices.
    let mut raw: Vec<(usize, usize, bool)> = Vec::new();
    let mut td = TreeDecomposition::new();
    let base: Vec<usize> = (0..=k).collect();
    for i in 0..=k {
        for j in (i + 1)..=k {
            raw.push((i, j, j == i + 1));
        }
    }
    td.insert(vec![], base.iter().map(|&v| label[v]).collect());
    let mut child_count: std::collections::HashMap<BagId, usize> = Default::default();
    // Each k-clique remembers the bag that created it.
    let mut cliques: Vec<(Vec<usize>, BagId)> = Vec::new();
    for skip in 0..=k {
        let c: Vec<usize> = base.iter().copied().filter(|&v| v != skip).collect();
        cliques.push((c, vec![]));
    }
    for v in (k + 1)..n {
        let idx = rng.gen_range(0..cliques.len());
        let (clique, owner) = cliques[idx].clone();
        let forced = if clique.is_empty() { usize::MAX } else { clique[rng.gen_range(0..clique.len())] };
        for &w in &clique {
            raw.push((w, v, w == forced));
        }
        let cnt = child_count.entry(owner.clone()).or_insert(0);
        let mut id = owner.clone();
        id.push(*cnt);
        *cnt += 1;
        let mut bag: Vec<VertexId> = clique.iter().map(|&w| label[w]).collect();
        bag.push(label[v]);
        td.insert(id.clone(), bag);
        for skip in 0..clique.len() {
            let mut c: Vec<usize> = clique.clone();
            c[skip] = v;
            c.sort_unstable();
            cliques.push((c, id.clone()));
        }
        if clique.is_empty() {
            cliques.push((vec![], id.clone()));
        }
    }

    let parity = if opts.bipartite { Some(bfs_parity(n, &raw)) } else { None };
    let mut edges = Vec::new();
    for &(a, b, forced) in &raw {
        if let Some(p) = &parity {
            if p[a] == p[b] {
                continue;
            }
        }
        let keep = (opts.connected && forced) || rng.gen_bool(keep_prob);
        if !keep {
            continue;
        }
        let (mut u, mut w) = (label[a], label[b]);
        let cost = rng.gen_range(weights.clone());
        if opts.directed {
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut u, &mut w);
            }
            edges.push(Edge { u, v: w, cost });
            if opts.antiparallel_prob > 0.0 && rng.gen_bool(opts.antiparallel_prob) {
                let c2 = rng.gen_range(weights.clone());
                edges.push(Edge { u: w, v: u, cost: c2 });
            }
        } else {
            edges.push(Edge { u, v: w, cost });
        }
    }
    let graph = MultiGraph::new(n, opts.directed, edges)?;
    Ok(Instance { graph, witness: td })
}

/// Parity of BFS depth over the forced (spanning) edges of the construction.
fn bfs_parity(n: usize, raw: &[(usize, usize, bool)]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, f) in raw {
        if f {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut par = vec![None; n];
    for s in 0..n {
        if par[s].is_some() {
            continue;
        }
        par[s] = Some(false);
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if par[v].is_none() {
                    par[v] = Some(!par[u].unwrap());
                    q.push_back(v);
                }
            }
        }
    }
    par.into_iter().map(|p| p.unwrap()).collect()
}

fn chain_td(bags: Vec<Vec<VertexId>>) -> TreeDecomposition {
    let mut td = TreeDecomposition::new();
    for (i, b) in bags.into_iter().enumerate() {
        td.insert(vec![0; i], b);
    }
    td
}

/// Path `0 - 1 - ... - (n-1)` with unit weights.
pub fn path(n: usize) -> Instance {
    let pairs: Vec<_> = (1..n).map(|i| (i - 1, i, 1)).collect();
    let bags = if n <= 1 { vec![(0..n).collect()] } else { (1..n).map(|i| vec![i - 1, i]).collect() };
    Instance { graph: MultiGraph::from_pairs(n, false, &pairs), witness: chain_td(bags) }
}

/// Cycle on `n >= 3` vertices with unit weights.
pub fn cycle(n: usize) -> Instance {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    let mut pairs: Vec<_> = (1..n).map(|i| (i - 1, i, 1)).collect();
    pairs.push((n - 1, 0, 1));
    let bags = (1..n - 1).map(|i| vec![0, i, i + 1]).collect();
    Instance { graph: MultiGraph::from_pairs(n, false, &pairs), witness: chain_td(bags) }
}

/// `rows x cols` grid, row-major ids, unit weights.
pub fn grid(rows: usize, cols: usize) -> Instance {
    let id = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((id(r, c), id(r, c + 1), 1));
            }
            if r + 1 < rows {
                pairs.push((id(r, c), id(r + 1, c), 1));
            }
        }
    }
    let n = rows * cols;
    let bags = if n <= cols + 1 {
        vec![(0..n).collect()]
    } else {
        (0..n - cols).map(|i| (i..=i + cols).collect()).collect()
    };
    Instance { graph: MultiGraph::from_pairs(n, false, &pairs), witness: chain_td(bags) }
}

/// Star with center 0 and `n - 1` leaves.
pub fn star(n: usize) -> Instance {
    let pairs: Vec<_> = (1..n).map(|i| (0, i, 1)).collect();
    let mut td = TreeDecomposition::new();
    td.insert(vec![], vec![0]);
    for i in 1..n {
        td.insert(vec![i - 1], vec![0, i]);
    }
    Instance { graph: MultiGraph::from_pairs(n, false, &pairs), witness: td }
}

/// Complete graph with unit weights.
pub fn clique(n: usize) -> Instance {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, 1));
        }
    }
    Instance { graph: MultiGraph::from_pairs(n, false, &pairs), witness: TreeDecomposition::single_bag(n) }
}

/// Random positive weights on an existing topology.
pub fn reweight(g: &MultiGraph, weights: RangeInclusive<u64>, seed: u64) -> MultiGraph {
    let mut rng = rng_from(seed);
    let costs: Vec<u64> = (0..g.m()).map(|_| rng.gen_range(weights.clone())).collect();
    g.with_costs(&costs)
}
