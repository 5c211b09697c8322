//! Min-cut class structure and the compact min-cut oracle.
//!
//! Vertices that no min-cut separates form one class; the classes are the
//! SCCs of the residual graph of any max-flow. Contracting them and
//! reversing the non-critical inter-class edges gives the strip graph, a DAG
//! in which min-cuts are exactly the maximal anti-chains of critical edges.
//! The oracle keeps only class labels, the `λ` projected flow paths, and the
//! rank and first-reach tables over them, which is `O(λn)` words.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_invariant, Error, Result};
use crate::flow::{decompose_into_paths, mask_caps, ResidualGraph, UnitFlow};
use crate::graph::{
    prune_within, scc_labels, scc_labels_filtered, DirectedMultigraph, EdgeId, EdgeSet, FlowNetwork,
    StPruning, VertexId,
};

/// Class label of a dropped vertex that takes the source side.
pub const OUTSIDE_SOURCE: u32 = u32::MAX - 1;
/// Class label of a dropped vertex that takes the sink side.
pub const OUTSIDE_SINK: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Multiplier in the stored-word bound `stored_words() <= WORD_BOUND_FACTOR * λ * n`
/// (for `λ >= 1`).
pub const WORD_BOUND_FACTOR: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceClasses {
    pub class_of: Vec<u32>,
    pub class_count: u32,
    pub source_class: u32,
    pub sink_class: u32,
}

impl EquivalenceClasses {
    pub fn class(&self, v: VertexId) -> u32 {
        self.class_of[v.index()]
    }

    pub fn is_inside(&self, v: VertexId) -> bool {
        self.class_of[v.index()] < OUTSIDE_SOURCE
    }
}

/// Classes are the SCCs of the residual graph of `f` restricted to the kept
/// part of `pruning`. Dropped vertices get an outside label.
pub fn build_classes(net: &FlowNetwork, pruning: &StPruning, f: &UnitFlow) -> Result<EquivalenceClasses> {
    let n = net.vertex_count();
    let outside = |v: VertexId| {
        if pruning.dropped_vertex_on_source_side(v) {
            OUTSIDE_SOURCE
        } else {
            OUTSIDE_SINK
        }
    };
    if pruning.empty {
        let class_of = net.graph.vertices().map(outside).collect();
        return Ok(EquivalenceClasses {
            class_of,
            class_count: 0,
            source_class: OUTSIDE_SOURCE,
            sink_class: OUTSIDE_SINK,
        });
    }
    let residual = ResidualGraph::of_unit(net, &pruning.kept, f)?;
    let raw = scc_labels(&residual);
    let mut remap = vec![NONE; n];
    let mut next = 0u32;
    let mut class_of = vec![NONE; n];
    for v in net.graph.vertices() {
        if !pruning.keeps_vertex(v) {
            class_of[v.index()] = outside(v);
            continue;
        }
        let r = raw[v.index()] as usize;
        if remap[r] == NONE {
            remap[r] = next;
            next += 1;
        }
        class_of[v.index()] = remap[r];
    }
    let source_class = class_of[net.source.index()];
    let sink_class = class_of[net.sink.index()];
    ensure_invariant!(source_class != sink_class, "source and sink share a residual SCC");
    Ok(EquivalenceClasses {
        class_of,
        class_count: next,
        source_class,
        sink_class,
    })
}

/// Quotient DAG over classes. Critical inter-class edges keep their
/// direction; non-critical ones are reversed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripGraph {
    pub node_count: u32,
    /// `(from class, to class, originating edge)`.
    pub arcs: Vec<(u32, u32, EdgeId)>,
}

impl StripGraph {
    pub fn to_multigraph(&self) -> DirectedMultigraph {
        DirectedMultigraph::from_edges(self.node_count as usize, self.arcs.iter().map(|&(a, b, _)| (a, b)))
    }
}

/// Builds the strip graph and checks that it is acyclic and equals the
/// reversed residual condensation (critical iff saturated, on inter-class
/// edges).
pub fn build_strip_graph(
    net: &FlowNetwork,
    classes: &EquivalenceClasses,
    kept: &EdgeSet,
    critical: &EdgeSet,
    f: &UnitFlow,
) -> Result<StripGraph> {
    let mut arcs = Vec::new();
    for e in kept.iter() {
        let (u, v) = net.graph.endpoints(e);
        let (cu, cv) = (classes.class(u), classes.class(v));
        if cu == cv {
            ensure_invariant!(!critical.contains(e), "critical edge {e} inside a class");
            continue;
        }
        ensure_invariant!(
            critical.contains(e) == f.on(e),
            "inter-class edge {e}: critical {} but flow {}",
            critical.contains(e),
            f.on(e)
        );
        if critical.contains(e) {
            arcs.push((cu, cv, e));
        } else {
            arcs.push((cv, cu, e));
        }
    }
    let strip = StripGraph {
        node_count: classes.class_count,
        arcs,
    };
    let g = strip.to_multigraph();
    let comps = scc_labels(&crate::graph::ArcView::new(&g));
    ensure_invariant!(
        comps.iter().copied().max().map_or(0, |c| c + 1) == classes.class_count,
        "strip graph has a cycle"
    );
    Ok(strip)
}

/// Cut given by its source side, with the crossing edges of the graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPartition {
    pub source_side: Vec<VertexId>,
    pub crossing: Vec<EdgeId>,
}

impl CutPartition {
    /// Crossing edges are those from `side` to its complement, skipping
    /// edges for which `skip` holds.
    pub fn from_side(graph: &DirectedMultigraph, side: &FixedBitSet, skip: impl Fn(EdgeId) -> bool) -> Self {
        let source_side = graph.vertices().filter(|v| side.contains(v.index())).collect();
        let crossing = graph
            .edge_ids()
            .filter(|&e| {
                let (u, v) = graph.endpoints(e);
                side.contains(u.index()) && !side.contains(v.index()) && !skip(e)
            })
            .collect();
        CutPartition { source_side, crossing }
    }

    pub fn size(&self) -> usize {
        self.crossing.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct CriticalSlot {
    path: u32,
    tail_class: u32,
    head_class: u32,
}

/// Compact min-cut oracle: decrease-by-`k` tests and nearest-min-cut
/// reporting after failures of critical edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinCutOracle {
    lambda: u32,
    edge_universe: u32,
    class_of: Vec<u32>,
    class_count: u32,
    source_class: u32,
    sink_class: u32,
    /// Class sequence of each projected path.
    path_nodes: Vec<Vec<u32>>,
    /// `rank[p * class_count + c]`: position of class `c` on path `p`.
    rank: Vec<u32>,
    /// `first_reach[p * class_count + c]`: earliest class on path `p`
    /// reachable from `c` in the strip graph.
    first_reach: Vec<u32>,
    critical: IndexMap<u32, CriticalSlot>,
}

impl MinCutOracle {
    /// Builds from a max-flow `f` of the kept part of `pruning` and its
    /// critical edge set.
    pub fn build(net: &FlowNetwork, pruning: &StPruning, f: &UnitFlow, critical: &EdgeSet) -> Result<Self> {
        let classes = build_classes(net, pruning, f)?;
        let lambda = f.value;
        let cc = classes.class_count as usize;
        let strip = build_strip_graph(net, &classes, &pruning.kept, critical, f)?;
        let paths = decompose_into_paths(net, f)?;

        let mut path_nodes = Vec::with_capacity(paths.len());
        let mut rank = vec![NONE; paths.len() * cc];
        let mut crit = IndexMap::new();
        for (p, path) in paths.iter().enumerate() {
            let mut nodes = vec![classes.source_class];
            rank[p * cc + classes.source_class as usize] = 0;
            for &e in path {
                let (u, v) = net.graph.endpoints(e);
                let (cu, cv) = (classes.class(u), classes.class(v));
                if cu == cv {
                    continue;
                }
                ensure_invariant!(critical.contains(e), "flow path crosses classes on non-critical {e}");
                ensure_invariant!(rank[p * cc + cv as usize] == NONE, "projected path {p} revisits a class");
                rank[p * cc + cv as usize] = nodes.len() as u32;
                nodes.push(cv);
                crit.insert(
                    e.0,
                    CriticalSlot {
                        path: p as u32,
                        tail_class: cu,
                        head_class: cv,
                    },
                );
            }
            ensure_invariant!(
                nodes.last() == Some(&classes.sink_class),
                "projected path {p} does not end at the sink class"
            );
            path_nodes.push(nodes);
        }
        ensure_invariant!(
            crit.len() == critical.len(),
            "{} critical edges but {} on projected paths",
            critical.len(),
            crit.len()
        );

        // Reverse sweeps from path nodes in rank order; a node marked by an
        // earlier sweep already has an earlier first-reach, and so does
        // everything that reaches it.
        let mut rev_adj: Vec<Vec<u32>> = vec![Vec::new(); cc];
        for &(a, b, _) in &strip.arcs {
            rev_adj[b as usize].push(a);
        }
        let mut first_reach = vec![NONE; paths.len() * cc];
        let mut queue = VecDeque::new();
        for (p, nodes) in path_nodes.iter().enumerate() {
            let row = &mut first_reach[p * cc..(p + 1) * cc];
            for &start in nodes {
                if row[start as usize] != NONE {
                    continue;
                }
                row[start as usize] = start;
                queue.push_back(start);
                while let Some(c) = queue.pop_front() {
                    for &pred in &rev_adj[c as usize] {
                        if row[pred as usize] == NONE {
                            row[pred as usize] = start;
                            queue.push_back(pred);
                        }
                    }
                }
            }
        }

        Ok(MinCutOracle {
            lambda,
            edge_universe: net.edge_count() as u32,
            class_of: classes.class_of,
            class_count: classes.class_count,
            source_class: classes.source_class,
            sink_class: classes.sink_class,
            path_nodes,
            rank,
            first_reach,
            critical: crit,
        })
    }

    /// Builds on the subgraph `scope` from scratch: prunes it, computes a
    /// max-flow, and labels critical edges by the residual test.
    pub fn build_for_scope(net: &FlowNetwork, scope: &EdgeSet) -> Result<(Self, StPruning)> {
        let pruning = prune_within(net, scope);
        let caps = mask_caps(&pruning.kept);
        let f = crate::flow::max_flow_bounded(&net.graph, net.source, net.sink, &caps, u64::MAX);
        let f = crate::flow::cancel_flow_cycles(&net.graph, &f.to_unit());
        let critical = residual_critical_set(net, &pruning.kept, &f)?;
        let oracle = MinCutOracle::build(net, &pruning, &f, &critical)?;
        Ok((oracle, pruning))
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn class_count(&self) -> u32 {
        self.class_count
    }

    pub fn class_of(&self, v: VertexId) -> u32 {
        self.class_of[v.index()]
    }

    pub fn source_class(&self) -> u32 {
        self.source_class
    }

    pub fn sink_class(&self) -> u32 {
        self.sink_class
    }

    pub fn path_nodes(&self) -> &[Vec<u32>] {
        &self.path_nodes
    }

    pub fn is_critical(&self, e: EdgeId) -> bool {
        self.critical.contains_key(&e.0)
    }

    pub fn critical_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.critical.keys().map(|&e| EdgeId(e))
    }

    /// Projected path index carrying a critical edge.
    pub fn path_of(&self, e: EdgeId) -> Option<usize> {
        self.critical.get(&e.0).map(|s| s.path as usize)
    }

    pub fn rank(&self, class: u32, path: usize) -> Option<u32> {
        let r = *self.rank.get(path * self.class_count as usize + class as usize)?;
        (r != NONE).then_some(r)
    }

    pub fn first_reach(&self, class: u32, path: usize) -> Option<u32> {
        let c = *self.first_reach.get(path * self.class_count as usize + class as usize)?;
        (c != NONE).then_some(c)
    }

    /// Machine words held by the oracle.
    pub fn stored_words(&self) -> usize {
        let path_words: usize = self.path_nodes.iter().map(Vec::len).sum();
        self.class_of.len() + path_words + self.rank.len() + self.first_reach.len() + 4 * self.critical.len() + 4
    }

    fn slot(&self, e: EdgeId) -> Result<CriticalSlot> {
        self.critical.get(&e.0).copied().ok_or(Error::NotCritical(e))
    }

    /// Some source-to-sink path of the strip graph uses `e_a` before `e_b`.
    pub fn precedes(&self, e_a: EdgeId, e_b: EdgeId) -> Result<bool> {
        let a = self.slot(e_a)?;
        let b = self.slot(e_b)?;
        let p = b.path as usize;
        let Some(reach) = self.first_reach(a.head_class, p) else {
            return Ok(false);
        };
        let reach_rank = self.rank(reach, p).expect("first-reach lies on its path");
        let b_rank = self.rank(b.tail_class, p).expect("critical tail lies on its path");
        Ok(reach_rank <= b_rank)
    }

    fn check_failures(&self, failed: &[EdgeId]) -> Result<()> {
        for (i, &e) in failed.iter().enumerate() {
            if e.0 >= self.edge_universe {
                return Err(Error::UnknownEdge(e.0));
            }
            if failed[..i].contains(&e) {
                return Err(Error::DuplicateEdge(e));
            }
        }
        Ok(())
    }

    /// The min-cut drops by exactly `|failed|`: all failed edges are critical
    /// and pairwise incomparable in the strip graph.
    pub fn decreases_by_k(&self, failed: &[EdgeId]) -> Result<bool> {
        self.check_failures(failed)?;
        if failed.is_empty() {
            return Err(Error::Precondition("decrease test needs at least one edge".into()));
        }
        if !failed.iter().all(|&e| self.is_critical(e)) {
            return Ok(false);
        }
        for &a in failed {
            for &b in failed {
                if a != b && self.precedes(a, b)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Source side of the nearest min-cut after failing `failed`, which must
    /// pass [`decreases_by_k`](Self::decreases_by_k). An empty `failed` gives
    /// the nearest min-cut of the original graph.
    ///
    /// A class joins the source side iff it is the source class or, on the
    /// path of some failed edge, its first reachable class ranks no later
    /// than that edge's tail class.
    pub fn report_nmc_after(&self, failed: &[EdgeId]) -> Result<FixedBitSet> {
        self.check_failures(failed)?;
        if !failed.is_empty() && !self.decreases_by_k(failed)? {
            return Err(Error::Precondition(
                "failed edges do not decrease the min-cut by their count".into(),
            ));
        }
        let mut tails = Vec::with_capacity(failed.len());
        for &e in failed {
            let slot = self.slot(e)?;
            if slot.tail_class == self.sink_class {
                log::warn!("nearest min-cut query rejected: tail of {e} is in the sink class");
                return Err(Error::Precondition(format!("tail of {e} lies in the sink class")));
            }
            let p = slot.path as usize;
            tails.push((p, self.rank(slot.tail_class, p).expect("tail on path")));
        }
        let cc = self.class_count as usize;
        let mut in_a = FixedBitSet::with_capacity(cc);
        if self.source_class < OUTSIDE_SOURCE {
            in_a.insert(self.source_class as usize);
        }
        for c in 0..cc {
            if in_a.contains(c) {
                continue;
            }
            let joins = tails.iter().any(|&(p, tail_rank)| {
                self.first_reach(c as u32, p)
                    .and_then(|r| self.rank(r, p))
                    .is_some_and(|r| r <= tail_rank)
            });
            in_a.set(c, joins);
        }
        let mut side = FixedBitSet::with_capacity(self.class_of.len());
        for (v, &c) in self.class_of.iter().enumerate() {
            let on_source = match c {
                OUTSIDE_SOURCE => true,
                OUTSIDE_SINK => false,
                c => in_a.contains(c as usize),
            };
            side.set(v, on_source);
        }
        Ok(side)
    }
}

/// Critical edges of `kept` by the residual test: saturated by `f` with
/// endpoints in distinct residual SCCs.
pub fn residual_critical_set(net: &FlowNetwork, kept: &EdgeSet, f: &UnitFlow) -> Result<EdgeSet> {
    let residual = ResidualGraph::of_unit(net, kept, f)?;
    let comp = scc_labels_filtered(&residual, |_| true);
    let mut critical = EdgeSet::empty(net.edge_count());
    for e in kept.iter() {
        let (u, v) = net.graph.endpoints(e);
        if f.on(e) && comp[u.index()] != comp[v.index()] {
            critical.insert(e);
        }
    }
    Ok(critical)
}

/// Helper for tests and verification: reachability inside the strip graph.
pub fn strip_reachable(strip: &StripGraph, from: u32) -> FixedBitSet {
    let g = strip.to_multigraph();
    let view = crate::graph::ArcView::new(&g);
    crate::graph::reachable_set(&view, VertexId(from), |_| true)
}
