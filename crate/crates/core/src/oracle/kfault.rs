//! `k`-failure min-cut oracle over a collection of augmented graphs.
//!
//! Every minimal cut `Z` of size at most `L = λ+k` is promoted to a minimum
//! cut by joining each vertex of its source side to `s` and each vertex of
//! its sink side to `t` with `L+1` parallel edges. A failure set is then
//! answered by decrease-by-`|F0|` tests on the min-cut oracles of these
//! augmented graphs, for every non-empty `F0 ⊆ F`.

use fixedbitset::FixedBitSet;
use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_invariant, Error, Result};
use crate::flow::max_flow_bounded;
use crate::graph::{reachable_set, ArcView, EdgeId, EdgeSet, FlowNetwork, ReverseView, StPruning, VertexId};
use crate::mincut::{CutPartition, MinCutOracle};

/// Vertex-subset enumeration limit on the pruned vertex count.
pub const ENUMERATION_VERTEX_LIMIT: usize = 22;

/// A minimal `(s,t)`-cut with its canonical source side (the vertices
/// reachable from `s` once the cut is removed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalCut {
    pub edges: Vec<EdgeId>,
    pub source_side: FixedBitSet,
}

/// All minimal cuts with at most `limit` edges, in discovery order.
///
/// Source sides range over subsets of the pruned vertices; dropped vertices
/// take the side that adds no crossing edge.
pub fn enumerate_minimal_cuts(net: &FlowNetwork, pruning: &StPruning, limit: usize) -> Result<Vec<MinimalCut>> {
    let g = &net.graph;
    let (s, t) = (net.source, net.sink);
    let kept = pruning.kept_vertex_count();
    if kept > ENUMERATION_VERTEX_LIMIT {
        return Err(Error::TooLarge(format!(
            "minimal-cut enumeration covers at most {ENUMERATION_VERTEX_LIMIT} vertices, graph has {kept} \
             after pruning; use the sampled verification profile instead"
        )));
    }
    if pruning.empty {
        return Ok(Vec::new());
    }
    let free: Vec<VertexId> = g
        .vertices()
        .filter(|&v| pruning.keeps_vertex(v) && v != s && v != t)
        .collect();
    let mut base = FixedBitSet::with_capacity(g.vertex_count());
    base.insert(s.index());
    for v in g.vertices() {
        if !pruning.keeps_vertex(v) && pruning.dropped_vertex_on_source_side(v) {
            base.insert(v.index());
        }
    }

    let fwd = ArcView::new(g);
    let rev = ReverseView::new(g);
    let mut seen: IndexSet<Vec<EdgeId>> = IndexSet::new();
    let mut cuts = Vec::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut side = base.clone();
        for (i, v) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                side.insert(v.index());
            }
        }
        let mut z = Vec::new();
        for e in g.edge_ids() {
            let (u, v) = g.endpoints(e);
            if side.contains(u.index()) && !side.contains(v.index()) {
                z.push(e);
                if z.len() > limit {
                    break;
                }
            }
        }
        if z.len() > limit || seen.contains(&z) {
            continue;
        }
        let removed = EdgeSet::from_ids(g.edge_count(), z.iter().copied());
        let allow = |a: usize| !removed.contains(EdgeId(a as u32));
        let from_s = reachable_set(&fwd, s, allow);
        let to_t = reachable_set(&rev, t, allow);
        let minimal = z.iter().all(|&e| {
            let (x, y) = g.endpoints(e);
            from_s.contains(x.index()) && to_t.contains(y.index())
        });
        if minimal {
            seen.insert(z.clone());
            cuts.push(MinimalCut {
                edges: z,
                source_side: from_s,
            });
        }
    }
    Ok(cuts)
}

/// One augmented graph of the collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedEntry {
    pub cut: Vec<EdgeId>,
    pub source_side: FixedBitSet,
    /// Min-cut value of the augmented graph; equals `|cut|`.
    pub lambda_e: u32,
    /// Added edges, all with ids from the original edge count upward.
    pub added_edges: usize,
    pub oracle: MinCutOracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KFaultOracle {
    k: usize,
    lambda: u32,
    l: u32,
    edge_count: usize,
    entries: Vec<AugmentedEntry>,
    /// Per original edge: entries in which it is critical, ascending.
    by_edge: Vec<Vec<u32>>,
    base: MinCutOracle,
}

/// Minimizing choice for a failure set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KChoice {
    pub value: u32,
    pub subset: Vec<EdgeId>,
    pub entry: Option<usize>,
}

impl KFaultOracle {
    /// `base` is the min-cut oracle of the pruned graph.
    pub fn build(net: &FlowNetwork, pruning: &StPruning, base: MinCutOracle, lambda: u32, k: usize) -> Result<Self> {
        let g = &net.graph;
        let m = g.edge_count();
        let l = lambda + k as u32;
        let cuts = enumerate_minimal_cuts(net, pruning, l as usize)?;
        let mut entries = Vec::with_capacity(cuts.len());
        let mut by_edge: Vec<Vec<u32>> = vec![Vec::new(); m];
        for cut in cuts {
            let mut aug = net.clone();
            for v in g.vertices() {
                let on_source = cut.source_side.contains(v.index());
                for _ in 0..=l {
                    if on_source && v != net.source {
                        aug.graph.add_edge(net.source, v);
                    } else if !on_source && v != net.sink {
                        aug.graph.add_edge(v, net.sink);
                    }
                }
            }
            let added = aug.edge_count() - m;
            let caps = vec![1; aug.edge_count()];
            let value = max_flow_bounded(&aug.graph, aug.source, aug.sink, &caps, u64::from(l) + 1).value;
            ensure_invariant!(
                value == cut.edges.len() as u64,
                "augmented max-flow {value} differs from cut size {}",
                cut.edges.len()
            );
            let crossing: Vec<EdgeId> = CutPartition::from_side(&aug.graph, &cut.source_side, |_| false).crossing;
            ensure_invariant!(crossing == cut.edges, "augmentation changed the crossing set of {:?}", cut.edges);
            let (oracle, _) = MinCutOracle::build_for_scope(&aug, &EdgeSet::full(aug.edge_count()))?;
            let idx = entries.len() as u32;
            for e in oracle.critical_edges() {
                if e.index() < m {
                    by_edge[e.index()].push(idx);
                }
            }
            entries.push(AugmentedEntry {
                cut: cut.edges,
                source_side: cut.source_side,
                lambda_e: value as u32,
                added_edges: added,
                oracle,
            });
        }
        for list in &mut by_edge {
            list.sort_unstable();
        }
        log::info!("k-failure collection: {} augmented graphs (L = {l})", entries.len());
        Ok(KFaultOracle {
            k,
            lambda,
            l,
            edge_count: m,
            entries,
            by_edge,
            base,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[AugmentedEntry] {
        &self.entries
    }

    fn check(&self, failed: &[EdgeId]) -> Result<()> {
        if failed.len() > self.k {
            return Err(Error::TooManyFailures {
                given: failed.len(),
                k: self.k,
            });
        }
        for (i, &e) in failed.iter().enumerate() {
            if e.index() >= self.edge_count {
                return Err(Error::UnknownEdge(e.0));
            }
            if failed[..i].contains(&e) {
                return Err(Error::DuplicateEdge(e));
            }
        }
        Ok(())
    }

    /// Minimizes `λ_E - |F0|` over subsets and entries. Ties prefer a larger
    /// subset, then the earliest subset mask and entry.
    pub fn choose(&self, failed: &[EdgeId]) -> Result<KChoice> {
        self.check(failed)?;
        let mut best = KChoice {
            value: self.lambda,
            subset: Vec::new(),
            entry: None,
        };
        if self.lambda == 0 {
            return Ok(best);
        }
        for mask in 1u32..(1u32 << failed.len()) {
            let subset: Vec<EdgeId> = failed
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            for &idx in &self.by_edge[subset[0].index()] {
                let entry = &self.entries[idx as usize];
                if !subset.iter().all(|&e| entry.oracle.is_critical(e)) {
                    continue;
                }
                if !entry.oracle.decreases_by_k(&subset)? {
                    continue;
                }
                let value = entry.lambda_e - subset.len() as u32;
                if value < best.value || (value == best.value && subset.len() > best.subset.len()) {
                    best = KChoice {
                        value,
                        subset: subset.clone(),
                        entry: Some(idx as usize),
                    };
                }
            }
        }
        Ok(best)
    }

    pub fn mincut_size_k(&self, failed: &[EdgeId]) -> Result<u32> {
        Ok(self.choose(failed)?.value)
    }

    /// A min-cut of `G - failed` with the size reported by
    /// [`mincut_size_k`](Self::mincut_size_k).
    pub fn mincut_partition_k(&self, net: &FlowNetwork, failed: &[EdgeId]) -> Result<CutPartition> {
        let choice = self.choose(failed)?;
        let side = match choice.entry {
            Some(i) => self.entries[i].oracle.report_nmc_after(&choice.subset)?,
            None if self.lambda == 0 => {
                let view = ArcView::new(&net.graph);
                reachable_set(&view, net.source, |_| true)
            }
            None => self.base.report_nmc_after(&[])?,
        };
        let mut side = side;
        side.grow(net.vertex_count());
        let cut = CutPartition::from_side(&net.graph, &side, |e| failed.contains(&e));
        ensure_invariant!(
            cut.size() == choice.value as usize,
            "reported partition has {} crossing edges, expected {}",
            cut.size(),
            choice.value
        );
        Ok(cut)
    }

    pub fn reachable_under_failures(&self, failed: &[EdgeId]) -> Result<bool> {
        Ok(self.mincut_size_k(failed)? >= 1)
    }

    /// Upper end of the cut sizes covered, `λ + k`.
    pub fn cut_limit(&self) -> u32 {
        self.l
    }
}
