//! Criticality labels, the calibrated subgraph, the auxiliary network `H`,
//! and the fault-tolerant flow families `A` and `B` with null-set
//! dictionaries.

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_invariant, Result};
use crate::flow::{
    cancel_int_cycles, decompose_into_paths, mask_caps, max_flow_bounded, merged_flow_value,
    solve_circulation, CirculationInstance, IntFlow, ResidualGraph, UnitFlow,
};
use crate::graph::{scc_labels, EdgeId, EdgeSet, FlowNetwork};

/// Per-edge criticality inside a scope subgraph.
///
/// `nu[e]` is the max-flow after merging `tail(e)` into `s` and `head(e)`
/// into `t`; it equals the smallest cut that keeps `tail(e)` on the source
/// side and `head(e)` on the sink side. `None` marks out-of-scope edges and
/// edges whose merge identifies `s` with `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalityLabels {
    pub lambda: u32,
    pub scope: EdgeSet,
    pub critical: EdgeSet,
    pub nu: Vec<Option<u32>>,
}

impl CriticalityLabels {
    #[inline]
    pub fn is_critical(&self, e: EdgeId) -> bool {
        self.critical.contains(e)
    }

    #[inline]
    pub fn nu(&self, e: EdgeId) -> Option<u32> {
        self.nu.get(e.index()).copied().flatten()
    }

    /// `e` lies in some minimal cut of size `λ+1`.
    #[inline]
    pub fn in_min_plus_one(&self, e: EdgeId) -> bool {
        self.nu(e) == Some(self.lambda + 1)
    }
}

/// Labels every edge of `scope` by exact merge-flow and cross-checks against
/// the residual test (saturated by a max-flow, endpoints in distinct residual
/// SCCs).
pub fn classify_edges(net: &FlowNetwork, scope: &EdgeSet) -> Result<CriticalityLabels> {
    let g = &net.graph;
    let caps = mask_caps(scope);
    let f = max_flow_bounded(g, net.source, net.sink, &caps, u64::MAX);
    let lambda = f.value as u32;
    let unit = crate::flow::cancel_flow_cycles(g, &f.to_unit());
    let residual = ResidualGraph::of_unit(net, scope, &unit)?;
    let comp = scc_labels(&residual);

    let mut critical = EdgeSet::empty(g.edge_count());
    let mut nu = vec![None; g.edge_count()];
    for e in scope.iter() {
        let (u, v) = g.endpoints(e);
        let value = merged_flow_value(g, net.source, net.sink, &caps, u, v, u64::MAX).map(|x| x as u32);
        nu[e.index()] = value;
        let by_nu = value == Some(lambda);
        let by_residual = unit.on(e) && comp[u.index()] != comp[v.index()];
        ensure_invariant!(
            by_nu == by_residual,
            "criticality tests disagree on {e}: merge-flow {value:?}, residual {by_residual}"
        );
        critical.set(e, by_nu);
    }
    Ok(CriticalityLabels {
        lambda,
        scope: scope.clone(),
        critical,
        nu,
    })
}

/// The calibrated subgraph: edges of the pruned graph that survive repeated
/// deletion of edges lying in no minimal cut of size `λ` or `λ+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibratedSubgraph {
    pub kept: EdgeSet,
    /// Edges of the input graph outside the calibrated subgraph, whether
    /// removed by pruning or by calibration.
    pub pruned: EdgeSet,
    pub lambda: u32,
}

/// Deletes edges one at a time in increasing id order, recomputing the
/// merge-flow inside the current subgraph, until a full pass deletes nothing.
///
/// Deleting single edges keeps every `G-e` value intact; deleting all
/// offending edges at once can remove two parallel copies together and
/// break that.
pub fn calibrate(net: &FlowNetwork, scope: &EdgeSet, labels: &CriticalityLabels) -> CalibratedSubgraph {
    let g = &net.graph;
    let lambda = labels.lambda;
    let mut kept = scope.clone();
    let mut caps = mask_caps(&kept);
    loop {
        let mut deleted = 0usize;
        for e in kept.to_vec() {
            // Critical edges have merge-flow λ in every subgraph of value λ.
            if labels.is_critical(e) {
                continue;
            }
            let (u, v) = g.endpoints(e);
            let limit = u64::from(lambda) + 2;
            let nu = merged_flow_value(g, net.source, net.sink, &caps, u, v, limit);
            if nu.is_none_or(|x| x > u64::from(lambda) + 1) {
                kept.remove(e);
                caps[e.index()] = 0;
                deleted += 1;
            }
        }
        log::debug!("calibration pass deleted {deleted} edges");
        if deleted == 0 {
            break;
        }
    }
    let mut pruned = EdgeSet::full(g.edge_count());
    for e in kept.iter() {
        pruned.remove(e);
    }
    CalibratedSubgraph { kept, pruned, lambda }
}

/// `H`: the scope subgraph with capacity `λ+1` on critical edges and `λ`
/// elsewhere, with an acyclic-support max-flow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Auxiliary {
    pub capacities: Vec<u32>,
    pub flow: IntFlow,
}

pub fn build_auxiliary(net: &FlowNetwork, labels: &CriticalityLabels) -> Result<Auxiliary> {
    let lambda = labels.lambda;
    let capacities: Vec<u32> = net
        .graph
        .edge_ids()
        .map(|e| match (labels.scope.contains(e), labels.is_critical(e)) {
            (false, _) => 0,
            (true, true) => lambda + 1,
            (true, false) => lambda,
        })
        .collect();
    let mut flow = max_flow_bounded(&net.graph, net.source, net.sink, &capacities, u64::MAX);
    let expected = u64::from(lambda) * u64::from(lambda + 1);
    ensure_invariant!(
        flow.value == expected,
        "auxiliary max-flow {} differs from λ(λ+1) = {expected}",
        flow.value
    );
    cancel_int_cycles(&net.graph, &mut flow);
    Ok(Auxiliary { capacities, flow })
}

/// Peels `λ+1` unit max-flows off the `H` flow, largest index first.
///
/// Round `i` solves the circulation with `d(s) = -λ`, `d(t) = λ`, upper bound
/// `min(1, h(e))` and lower bound 1 exactly where `h(e) = i`, then subtracts
/// the result from `h`. Returned in index order: element `j` is `f_{j+1}`.
pub fn peel_family_a(net: &FlowNetwork, aux: &Auxiliary, lambda: u32) -> Result<Vec<UnitFlow>> {
    let g = &net.graph;
    let m = g.edge_count();
    let mut h = aux.flow.assignment.clone();
    let mut demand = vec![0i64; g.vertex_count()];
    demand[net.source.index()] -= i64::from(lambda);
    demand[net.sink.index()] += i64::from(lambda);
    let mut peeled = Vec::with_capacity(lambda as usize + 1);
    for i in (1..=lambda + 1).rev() {
        ensure_invariant!(
            h.iter().all(|&x| x <= i),
            "residual H-flow exceeds {i} before round {i}"
        );
        let inst = CirculationInstance {
            graph: g.clone(),
            demand: demand.clone(),
            lower: h.iter().map(|&x| u32::from(x == i)).collect(),
            upper: h.iter().map(|&x| x.min(1)).collect(),
        };
        let Some(sol) = solve_circulation(&inst) else {
            return Err(crate::Error::Invariant(format!("peeling circulation infeasible in round {i}")));
        };
        let mut carries = EdgeSet::empty(m);
        for e in g.edge_ids() {
            if sol[e.index()] == 1 {
                carries.insert(e);
                h[e.index()] -= 1;
            }
        }
        peeled.push(UnitFlow { carries, value: lambda });
    }
    ensure_invariant!(h.iter().all(|&x| x == 0), "H-flow not exhausted after peeling");
    peeled.reverse();
    Ok(peeled)
}

/// Whether the null-set size bounds are hard errors. They hold on the
/// calibrated subgraph; on a merely pruned graph, arbitrarily many parallel
/// zero-flow edges may exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullBounds {
    Enforce { n: usize },
    Unchecked,
}

/// Families `A` and `B` over one scope subgraph.
///
/// Member order: `f_1..f_{λ+1}` at indices `0..=λ`, then `g_1..g_λ`. The
/// representative `f̃` is `f_1`, and `g_i` is `f̃` with decomposition path
/// `P_i` removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowFamily {
    pub lambda: u32,
    pub scope: EdgeSet,
    pub auxiliary: Auxiliary,
    pub members: Vec<UnitFlow>,
    pub paths: Vec<Vec<EdgeId>>,
    pub representative: usize,
    pub nullsets: Vec<IndexSet<u32>>,
    pub nullmin1: Vec<IndexSet<u32>>,
    /// Union over `A` of `null(f, min+1)`.
    pub nullmin1_union: EdgeSet,
    canonical: Vec<u32>,
}

const NO_MEMBER: u32 = u32::MAX;

impl FlowFamily {
    pub fn a(&self) -> &[UnitFlow] {
        &self.members[..=self.lambda as usize]
    }

    pub fn b_extra(&self) -> &[UnitFlow] {
        &self.members[self.lambda as usize + 1..]
    }

    pub fn f_tilde(&self) -> &UnitFlow {
        &self.members[self.representative]
    }

    /// Decomposition path removed to form member `i`, if `i` is a `g` flow.
    pub fn removed_path(&self, i: usize) -> Option<usize> {
        i.checked_sub(self.lambda as usize + 1)
    }

    /// Member that is a max-flow of the scope minus `e`; `None` outside scope.
    pub fn canonical_for_edge(&self, e: EdgeId) -> Option<usize> {
        match self.canonical.get(e.index()) {
            Some(&i) if i != NO_MEMBER => Some(i as usize),
            _ => None,
        }
    }

    #[inline]
    pub fn in_null(&self, member: usize, e: EdgeId) -> bool {
        self.nullsets[member].contains(&e.0)
    }

    #[inline]
    pub fn in_nullmin1(&self, member: usize, e: EdgeId) -> bool {
        self.nullmin1[member].contains(&e.0)
    }
}

/// Builds `B` from `A`: decomposes `f̃`, forms the `g_i`, assigns canonical
/// flows per edge, and fills the null dictionaries.
pub fn extend_family_b(
    net: &FlowNetwork,
    labels: &CriticalityLabels,
    auxiliary: Auxiliary,
    a: Vec<UnitFlow>,
    bounds: NullBounds,
) -> Result<FlowFamily> {
    let lambda = labels.lambda;
    let m = net.edge_count();
    ensure_invariant!(a.len() == lambda as usize + 1, "family A has {} members", a.len());
    let f_tilde = a[0].clone();
    let paths = decompose_into_paths(net, &f_tilde)?;

    let mut members = a;
    for path in &paths {
        let mut g = f_tilde.clone();
        for &e in path {
            g.carries.remove(e);
        }
        g.value = lambda - 1;
        members.push(g);
    }

    let mut path_of = vec![NO_MEMBER; m];
    for (i, path) in paths.iter().enumerate() {
        for &e in path {
            path_of[e.index()] = i as u32;
        }
    }
    let mut canonical = vec![NO_MEMBER; m];
    for e in labels.scope.iter() {
        canonical[e.index()] = if labels.is_critical(e) {
            let p = path_of[e.index()];
            ensure_invariant!(p != NO_MEMBER, "critical edge {e} on no decomposition path");
            lambda + 1 + p
        } else {
            let i = members[..=lambda as usize].iter().position(|f| !f.on(e));
            ensure_invariant!(i.is_some(), "non-critical edge {e} carries flow in every member of A");
            i.expect("checked") as u32
        };
    }

    let mut nullsets = Vec::with_capacity(members.len());
    let mut nullmin1 = Vec::with_capacity(members.len());
    let mut nullmin1_union = EdgeSet::empty(m);
    for (i, f) in members.iter().enumerate() {
        let null: IndexSet<u32> = labels.scope.iter().filter(|&e| !f.on(e)).map(|e| e.0).collect();
        let min1: IndexSet<u32> = null
            .iter()
            .copied()
            .filter(|&e| labels.in_min_plus_one(EdgeId(e)))
            .collect();
        if let NullBounds::Enforce { n } = bounds {
            ensure_invariant!(null.len() <= 3 * n, "null set of member {i} has {} > 3n edges", null.len());
            if i <= lambda as usize {
                ensure_invariant!(
                    min1.len() <= 2 * n,
                    "min+1 null set of member {i} has {} > 2n edges",
                    min1.len()
                );
            }
        }
        if i <= lambda as usize {
            for &e in &min1 {
                nullmin1_union.insert(EdgeId(e));
            }
        }
        nullsets.push(null);
        nullmin1.push(min1);
    }

    Ok(FlowFamily {
        lambda,
        scope: labels.scope.clone(),
        auxiliary,
        members,
        paths,
        representative: 0,
        nullsets,
        nullmin1,
        nullmin1_union,
        canonical,
    })
}

/// Full pipeline for one scope: auxiliary network, peeling, extension.
pub fn build_family(net: &FlowNetwork, labels: &CriticalityLabels, bounds: NullBounds) -> Result<FlowFamily> {
    let aux = build_auxiliary(net, labels)?;
    let a = peel_family_a(net, &aux, labels.lambda)?;
    extend_family_b(net, labels, aux, a, bounds)
}
