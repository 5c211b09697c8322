//! Reference answers computed from scratch.
//!
//! Deliberately shares nothing with the flow engine: depth-first
//! Ford-Fulkerson over an adjacency list of paired residual arcs.

use fixedbitset::FixedBitSet;

use crate::graph::{EdgeId, FlowNetwork, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteResult {
    pub value: u32,
    /// Vertices reachable from `s` in the final residual graph.
    pub source_side: FixedBitSet,
}

struct Arc {
    to: usize,
    cap: u32,
    twin: usize,
}

/// Max-flow of `G - failed` and the nearest min-cut source side.
pub fn brute_force(net: &FlowNetwork, failed: &[EdgeId]) -> BruteResult {
    let g = &net.graph;
    let n = g.vertex_count();
    let mut arcs: Vec<Arc> = Vec::with_capacity(2 * g.edge_count());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edge_ids() {
        if failed.contains(&e) {
            continue;
        }
        let (u, v) = g.endpoints(e);
        let (a, b) = (arcs.len(), arcs.len() + 1);
        arcs.push(Arc { to: v.index(), cap: 1, twin: b });
        arcs.push(Arc { to: u.index(), cap: 0, twin: a });
        adj[u.index()].push(a);
        adj[v.index()].push(b);
    }
    let (s, t) = (net.source.index(), net.sink.index());
    let mut value = 0u32;
    loop {
        let mut visited = vec![false; n];
        let mut via: Vec<usize> = vec![usize::MAX; n];
        let mut stack = vec![s];
        visited[s] = true;
        while let Some(v) = stack.pop() {
            if v == t {
                break;
            }
            for &a in &adj[v] {
                let w = arcs[a].to;
                if arcs[a].cap > 0 && !visited[w] {
                    visited[w] = true;
                    via[w] = a;
                    stack.push(w);
                }
            }
        }
        if !visited[t] {
            let mut side = FixedBitSet::with_capacity(n);
            for (v, &seen) in visited.iter().enumerate() {
                side.set(v, seen);
            }
            return BruteResult { value, source_side: side };
        }
        let mut v = t;
        while v != s {
            let a = via[v];
            arcs[a].cap -= 1;
            let twin = arcs[a].twin;
            arcs[twin].cap += 1;
            v = arcs[twin].to;
        }
        value += 1;
    }
}

/// Every `(s,t)`-cut given by a vertex bipartition: `(source side mask,
/// crossing edges)`. Exponential; for `n <= 20`.
pub fn all_partition_cuts(net: &FlowNetwork) -> Vec<(u32, Vec<EdgeId>)> {
    let g = &net.graph;
    let n = g.vertex_count();
    assert!(n <= 20, "bipartition enumeration is limited to 20 vertices");
    let (s, t) = (net.source.0, net.sink.0);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask >> s & 1 == 0 || mask >> t & 1 == 1 {
            continue;
        }
        let crossing = g
            .edge_ids()
            .filter(|&e| {
                let (u, v) = g.endpoints(e);
                mask >> u.0 & 1 == 1 && mask >> v.0 & 1 == 0
            })
            .collect();
        out.push((mask, crossing));
    }
    out
}

/// Distinct minimum `(s,t)`-cut edge sets.
pub fn all_min_cuts(net: &FlowNetwork) -> Vec<Vec<EdgeId>> {
    let cuts = all_partition_cuts(net);
    let best = cuts.iter().map(|(_, c)| c.len()).min().unwrap_or(0);
    let mut sets: Vec<Vec<EdgeId>> = cuts.into_iter().filter(|(_, c)| c.len() == best).map(|(_, c)| c).collect();
    sets.sort();
    sets.dedup();
    sets
}

/// Number of distinct `(s,t)`-paths in `G - failed`, assuming the remaining
/// graph is acyclic.
pub fn count_st_paths_dag(net: &FlowNetwork, failed: &[EdgeId]) -> u64 {
    let g = &net.graph;
    let mut memo: Vec<Option<u64>> = vec![None; g.vertex_count()];
    fn walk(net: &FlowNetwork, failed: &[EdgeId], v: VertexId, memo: &mut Vec<Option<u64>>) -> u64 {
        if v == net.sink {
            return 1;
        }
        if let Some(c) = memo[v.index()] {
            return c;
        }
        let mut total = 0;
        for &e in net.graph.out_edges(v) {
            if !failed.contains(&e) {
                total += walk(net, failed, net.graph.head(e), memo);
            }
        }
        memo[v.index()] = Some(total);
        total
    }
    walk(net, failed, net.source, &mut memo)
}
