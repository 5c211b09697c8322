//! Strong connectivity on residual graphs under one edge failure, and cycle
//! extraction through a designated reverse arc.
//!
//! The index keeps the whole residual graph and answers each query with
//! graph traversals. Failing an edge removes both of its residual arcs.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{ResidualArc, ResidualGraph};
use crate::graph::{reachable_set, scc_labels, Digraph, EdgeId, EdgeSet, VertexId};

/// Sparse subgraph with the same SCCs as its host: per SCC, a BFS out-tree
/// and a BFS in-tree rooted at the smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccCertificate {
    /// Host arc indices, ascending.
    pub arcs: Vec<usize>,
}

pub fn build_certificate<G: Digraph + ?Sized>(g: &G) -> SccCertificate {
    let n = g.node_count();
    let comp = scc_labels(g);
    let mut in_arcs: Vec<Vec<u32>> = vec![Vec::new(); n];
    for a in 0..g.arc_count() {
        in_arcs[g.arc_endpoints(a).1.index()].push(a as u32);
    }
    let mut chosen = FixedBitSet::with_capacity(g.arc_count());
    let mut rooted = FixedBitSet::with_capacity(n);
    let mut queue = VecDeque::new();
    for root in 0..n {
        let c = comp[root];
        if rooted.contains(c as usize) {
            continue;
        }
        rooted.insert(c as usize);
        for reverse in [false, true] {
            let mut seen = FixedBitSet::with_capacity(n);
            seen.insert(root);
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                let list: &[u32] = if reverse { &in_arcs[v] } else { g.out_arcs(VertexId(v as u32)) };
                for &a in list {
                    let (x, y) = g.arc_endpoints(a as usize);
                    let w = if reverse { x.index() } else { y.index() };
                    if comp[w] != c || seen.contains(w) {
                        continue;
                    }
                    seen.insert(w);
                    chosen.insert(a as usize);
                    queue.push_back(w);
                }
            }
        }
    }
    let arcs: Vec<usize> = chosen.ones().collect();
    debug_assert!(arcs.len() <= 2 * n);
    SccCertificate { arcs }
}

/// One arc of an extracted cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleArc {
    Residual(ResidualArc),
    /// The virtual `(s,t)` arc.
    Artificial,
}

/// Edges whose flow a residual cycle toggles: the originating edge of every
/// residual arc on it. The artificial arc maps to no edge.
pub fn toggle_set(cycle: &[CycleArc]) -> Vec<EdgeId> {
    let mut edges: Vec<EdgeId> = cycle
        .iter()
        .filter_map(|a| match a {
            CycleArc::Residual(r) => Some(r.edge),
            CycleArc::Artificial => None,
        })
        .collect();
    edges.sort_unstable();
    edges
}

/// Failure-query index over one residual graph. The artificial `(s,t)` arc
/// is not stored; queries that want it pass `artificial_st`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FtSccIndex {
    host: ResidualGraph,
    source: VertexId,
    sink: VertexId,
    certificate: SccCertificate,
}

impl FtSccIndex {
    pub fn build(host: ResidualGraph, source: VertexId, sink: VertexId) -> Self {
        let certificate = build_certificate(&host);
        FtSccIndex {
            host,
            source,
            sink,
            certificate,
        }
    }

    pub fn host(&self) -> &ResidualGraph {
        &self.host
    }

    pub fn certificate(&self) -> &SccCertificate {
        &self.certificate
    }

    fn check_edge(&self, e: EdgeId) -> Result<()> {
        if e.index() >= self.host.edge_count() {
            return Err(Error::UnknownEdge(e.0));
        }
        Ok(())
    }

    /// `x` and `y` are strongly connected in the host minus both arcs of `e`.
    pub fn strongly_connected_without(&self, x: VertexId, y: VertexId, e: EdgeId) -> Result<bool> {
        self.check_edge(e)?;
        let allow = |a: usize| self.host.arc(a).edge != e;
        Ok(reachable_set(&self.host, x, allow).contains(y.index())
            && reachable_set(&self.host, y, allow).contains(x.index()))
    }

    /// A simple cycle through the reverse arc of `target` that avoids `e`,
    /// found by one BFS from `tail(target)` back to `head(target)`. With
    /// `artificial_st` the virtual `(s,t)` arc is usable.
    pub fn cycle_through_arc_without(
        &self,
        target: EdgeId,
        e: EdgeId,
        artificial_st: bool,
    ) -> Result<Option<Vec<CycleArc>>> {
        self.check_edge(e)?;
        self.check_edge(target)?;
        let Some(rev) = self.host.reverse_arc(target).filter(|_| target != e) else {
            return Err(Error::Precondition(format!(
                "reverse arc of {target} is not present in the residual graph minus {e}"
            )));
        };
        let rev_arc = self.host.arc(rev);
        let (from, to) = (rev_arc.to, rev_arc.from);

        // Arc index `arc_count` stands for the artificial arc.
        let artificial = self.host.arc_count();
        let n = self.host.node_count();
        let mut pred: Vec<usize> = vec![usize::MAX; n];
        let mut seen = FixedBitSet::with_capacity(n);
        let mut queue = VecDeque::new();
        seen.insert(from.index());
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            let extra = (artificial_st && v == self.source).then_some(artificial);
            let arcs = self.host.out_arcs(v).iter().map(|&a| a as usize).chain(extra);
            for a in arcs {
                let w = if a == artificial {
                    self.sink
                } else {
                    let arc = self.host.arc(a);
                    if arc.edge == e {
                        continue;
                    }
                    arc.to
                };
                if seen.contains(w.index()) {
                    continue;
                }
                seen.insert(w.index());
                pred[w.index()] = a;
                queue.push_back(w);
            }
        }
        if !seen.contains(to.index()) {
            return Ok(None);
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let a = pred[cur.index()];
            if a == artificial {
                path.push(CycleArc::Artificial);
                cur = self.source;
            } else {
                let arc = self.host.arc(a);
                path.push(CycleArc::Residual(arc));
                cur = arc.from;
            }
        }
        path.push(CycleArc::Residual(rev_arc));
        path.reverse();
        Ok(Some(path))
    }
}

/// Ground truth for tests: SCC labels of the host with one edge's arcs removed.
pub fn scc_without(host: &ResidualGraph, e: Option<EdgeId>) -> Vec<u32> {
    crate::graph::scc_labels_filtered(host, |a| Some(host.arc(a).edge) != e)
}

/// Membership mask of a certificate's arcs.
pub fn certificate_mask(host: &ResidualGraph, cert: &SccCertificate) -> EdgeSet {
    EdgeSet::from_ids(host.arc_count(), cert.arcs.iter().map(|&a| EdgeId(a as u32)))
}
