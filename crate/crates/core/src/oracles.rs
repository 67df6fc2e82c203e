//! Centralized reference computations used only for verification. Nothing
//! here shares code with the distributed algorithms beyond the graph types.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::graph::{dist_add, CommGraph, MultiGraph, VertexId, INF};

/// Dijkstra from `s`, optionally ignoring one edge.
fn dijkstra(g: &MultiGraph, s: VertexId, skip: Option<usize>) -> Vec<u64> {
    let mut d = vec![INF; g.n()];
    d[s] = 0;
    let mut pq = BinaryHeap::new();
    pq.push(Reverse((0u64, s)));
    while let Some(Reverse((du, u))) = pq.pop() {
        if du > d[u] {
            continue;
        }
        for a in g.out_arcs(u) {
            if Some(a.edge) == skip || a.cost == INF {
                continue;
            }
            let nd = dist_add(du, a.cost);
            if nd < d[a.other] {
                d[a.other] = nd;
                pq.push(Reverse((nd, a.other)));
            }
        }
    }
    d
}

/// Exact all-pairs distances, respecting edge directions.
pub fn oracle_apsp(g: &MultiGraph) -> Vec<Vec<u64>> {
    (0..g.n()).map(|s| dijkstra(g, s, None)).collect()
}

/// Maximum bipartite matching by Hopcroft-Karp. Returns the matched pairs.
/// Panics if the graph is not bipartite.
pub fn oracle_matching(g: &MultiGraph) -> Vec<(VertexId, VertexId)> {
    let c = g.comm_graph();
    let n = c.n();
    let mut side = vec![u8::MAX; n];
    for s in 0..n {
        if side[s] != u8::MAX {
            continue;
        }
        side[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in c.neighbors(u) {
                if side[w] == u8::MAX {
                    side[w] = 1 - side[u];
                    q.push_back(w);
                } else {
                    assert_ne!(side[w], side[u], "graph is not bipartite");
                }
            }
        }
    }
    let left: Vec<VertexId> = (0..n).filter(|&v| side[v] == 0).collect();
    let mut mate = vec![usize::MAX; n];
    loop {
        // Layered BFS from free left vertices.
        let mut dist = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        for &u in &left {
            if mate[u] == usize::MAX {
                dist[u] = 0;
                q.push_back(u);
            }
        }
        let mut found = false;
        while let Some(u) = q.pop_front() {
            for &w in c.neighbors(u) {
                let m = mate[w];
                if m == usize::MAX {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[u] + 1;
                    q.push_back(m);
                }
            }
        }
        if !found {
            break;
        }
        fn dfs(u: usize, c: &CommGraph, dist: &mut [usize], mate: &mut [usize]) -> bool {
            for &w in c.neighbors(u) {
                let m = mate[w];
                if m == usize::MAX || (dist[m] == dist[u] + 1 && dfs(m, c, dist, mate)) {
                    mate[u] = w;
                    mate[w] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for &u in &left {
            if mate[u] == usize::MAX {
                dfs(u, &c, &mut dist, &mut mate);
            }
        }
    }
    left.iter().filter(|&&u| mate[u] != usize::MAX).map(|&u| (u.min(mate[u]), u.max(mate[u]))).collect()
}

/// Weight of the shortest simple cycle, `INF` for acyclic graphs. Directed
/// graphs use directed cycles; in undirected multigraphs two parallel edges
/// form a cycle.
pub fn oracle_girth(g: &MultiGraph) -> u64 {
    let mut best = INF;
    for (id, e) in g.edges().iter().enumerate() {
        if e.cost == INF {
            continue;
        }
        if e.u == e.v {
            best = best.min(e.cost);
            continue;
        }
        let back = if g.is_directed() { dijkstra(g, e.v, None)[e.u] } else { dijkstra(g, e.u, Some(id))[e.v] };
        best = best.min(dist_add(e.cost, back));
    }
    best
}

/// Shortest weight of walks with at most `max_len` edges, indexed
/// `[s][t][q]` by the state obtained by folding `delta` over the walk from
/// the initial state `start`. Walks follow edge directions.
pub fn oracle_constrained_walks(
    g: &MultiGraph,
    num_states: usize,
    start: usize,
    delta: &dyn Fn(usize, usize) -> usize,
    max_len: usize,
) -> Vec<Vec<Vec<u64>>> {
    let n = g.n();
    let mut out = vec![vec![vec![INF; num_states]; n]; n];
    for s in 0..n {
        let mut cur = vec![vec![INF; num_states]; n];
        cur[s][start] = 0;
        let mut best = cur.clone();
        for _ in 0..max_len {
            let mut next = vec![vec![INF; num_states]; n];
            for u in 0..n {
                for q in 0..num_states {
                    if cur[u][q] == INF {
                        continue;
                    }
                    for a in g.out_arcs(u) {
                        if a.cost == INF {
                            continue;
                        }
                        let q2 = delta(q, a.edge);
                        let w = cur[u][q] + a.cost;
                        if w < next[a.other][q2] {
                            next[a.other][q2] = w;
                        }
                    }
                }
            }
            for v in 0..n {
                for q in 0..num_states {
                    best[v][q] = best[v][q].min(next[v][q]);
                }
            }
            cur = next;
        }
        out[s] = best;
    }
    out
}

/// Exact minimum X-Y vertex cut avoiding `X ∪ Y`, by exhaustive search over
/// subsets in increasing size. `None` means no finite cut exists (X meets Y
/// or an edge joins them).
pub fn oracle_min_vertex_cut(c: &CommGraph, xs: &[VertexId], ys: &[VertexId]) -> Option<Vec<VertexId>> {
    let n = c.n();
    let mut inx = vec![false; n];
    let mut iny = vec![false; n];
    xs.iter().for_each(|&v| inx[v] = true);
    ys.iter().for_each(|&v| iny[v] = true);
    if (0..n).any(|v| inx[v] && iny[v]) || c.edges().any(|(a, b)| (inx[a] && iny[b]) || (inx[b] && iny[a])) {
        return None;
    }
    let free: Vec<VertexId> = (0..n).filter(|&v| !inx[v] && !iny[v]).collect();
    assert!(free.len() <= 24, "exhaustive cut search is for small graphs");
    let separates = |removed: &[bool]| -> bool {
        let mut seen = vec![false; n];
        let mut stack: Vec<VertexId> = xs.to_vec();
        xs.iter().for_each(|&v| seen[v] = true);
        while let Some(u) = stack.pop() {
            if iny[u] {
                return false;
            }
            for &w in c.neighbors(u) {
                if !seen[w] && !removed[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        true
    };
    for k in 0..=free.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut removed = vec![false; n];
            idx.iter().for_each(|&i| removed[free[i]] = true);
            if separates(&removed) {
                return Some(idx.iter().map(|&i| free[i]).collect());
            }
            // Next k-combination in lexicographic order.
            let mut i = k;
            while i > 0 && idx[i - 1] == free.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    None
}

/// Minimum X-Y vertex cut size by unit-capacity max flow on the split graph;
/// `None` for an infinite cut. Suitable for larger graphs.
pub fn oracle_min_vertex_cut_size(c: &CommGraph, xs: &[VertexId], ys: &[VertexId]) -> Option<usize> {
    let n = c.n();
    let mut inx = vec![false; n];
    let mut iny = vec![false; n];
    xs.iter().for_each(|&v| inx[v] = true);
    ys.iter().for_each(|&v| iny[v] = true);
    if (0..n).any(|v| inx[v] && iny[v]) || c.edges().any(|(a, b)| (inx[a] && iny[b]) || (inx[b] && iny[a])) {
        return None;
    }
    // Nodes: v_in = 2v, v_out = 2v+1, source 2n, sink 2n+1.
    let big = n as i64 + 1;
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
    let mut to = Vec::new();
    let mut cap: Vec<i64> = Vec::new();
    let mut add = |a: usize, b: usize, k: i64, head: &mut Vec<Vec<usize>>| {
        head[a].push(to.len());
        to.push(b);
        cap.push(k);
        head[b].push(to.len());
        to.push(a);
        cap.push(0);
    };
    for v in 0..n {
        add(2 * v, 2 * v + 1, if inx[v] || iny[v] { big } else { 1 }, &mut head);
        if inx[v] {
            add(2 * n, 2 * v, big, &mut head);
        }
        if iny[v] {
            add(2 * v + 1, 2 * n + 1, big, &mut head);
        }
    }
    for (a, b) in c.edges() {
        add(2 * a + 1, 2 * b, big, &mut head);
        add(2 * b + 1, 2 * a, big, &mut head);
    }
    let (s, t) = (2 * n, 2 * n + 1);
    let mut flow = 0usize;
    loop {
        let mut prev = vec![usize::MAX; 2 * n + 2];
        let mut q = VecDeque::from([s]);
        prev[s] = usize::MAX - 1;
        while let Some(u) = q.pop_front() {
            for &e in &head[u] {
                if cap[e] > 0 && prev[to[e]] == usize::MAX {
                    prev[to[e]] = e;
                    q.push_back(to[e]);
                }
            }
        }
        if prev[t] == usize::MAX {
            return Some(flow);
        }
        let mut v = t;
        while v != s {
            let e = prev[v];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            v = to[e ^ 1];
        }
        flow += 1;
        if flow > n {
            return None;
        }
    }
}

/// Whether removing `sep` leaves every component with at most an
/// `alpha = num/den` fraction of the target set `xs`.
pub fn oracle_balance(c: &CommGraph, sep: &[VertexId], xs: &[VertexId], alpha: (u64, u64)) -> bool {
    let n = c.n();
    let mut removed = vec![false; n];
    sep.iter().for_each(|&v| removed[v] = true);
    let mut inx = vec![false; n];
    xs.iter().for_each(|&v| inx[v] = true);
    let total = inx.iter().filter(|&&b| b).count() as u64;
    let mut seen = vec![false; n];
    for s in 0..n {
        if removed[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut mu = 0u64;
        while let Some(u) = stack.pop() {
            mu += inx[u] as u64;
            for &w in c.neighbors(u) {
                if !removed[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if mu * alpha.1 > alpha.0 * total {
            return false;
        }
    }
    true
}
