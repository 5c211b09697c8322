//! Integral max-flow, residual graphs, flow canonicalization and path
//! decomposition, and circulations with lower bounds.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Digraph, DirectedMultigraph, EdgeId, EdgeSet, FlowNetwork, VertexId};

/// Capacity used to simulate unbounded arcs inside [`CapNetwork`].
pub const INF_CAP: u32 = u32::MAX / 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("flow violates capacity on edge {0}")]
    CapacityViolated(EdgeId),
    #[error("flow violates conservation at vertex {0}")]
    ConservationViolated(VertexId),
    #[error("flow assignment has {found} entries, network has {expected} edges")]
    LengthMismatch { expected: usize, found: usize },
    #[error("flow contains a directed cycle")]
    Cyclic,
    #[error("instance has {n} vertices; exhaustive check is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// Residual-capacity max-flow engine over an explicit edge list.
///
/// Each vertex's incidence list holds both outgoing and incoming edges in
/// increasing edge order, so BFS explores arcs lowest-EdgeId first and
/// augmentation is fully deterministic.
#[derive(Clone, Debug)]
pub struct CapNetwork {
    n: usize,
    tail: Vec<u32>,
    head: Vec<u32>,
    cap: Vec<u32>,
    flow: Vec<u32>,
    // Arc code: edge << 1 | 1 for the reverse direction.
    adj: Vec<Vec<u32>>,
}

impl CapNetwork {
    pub fn new(n: usize) -> Self {
        CapNetwork {
            n,
            tail: Vec::new(),
            head: Vec::new(),
            cap: Vec::new(),
            flow: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Network over `graph` with the given capacities; an edge of capacity 0
    /// is treated as absent.
    pub fn from_graph(graph: &DirectedMultigraph, caps: &[u32]) -> Self {
        assert_eq!(caps.len(), graph.edge_count());
        let mut net = CapNetwork::new(graph.vertex_count());
        for e in graph.edge_ids() {
            let (u, v) = graph.endpoints(e);
            net.add_edge(u, v, caps[e.index()]);
        }
        net
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, cap: u32) -> usize {
        let id = self.tail.len();
        self.tail.push(u.0);
        self.head.push(v.0);
        self.cap.push(cap);
        self.flow.push(0);
        if cap > 0 {
            self.adj[u.index()].push((id as u32) << 1);
            self.adj[v.index()].push(((id as u32) << 1) | 1);
        }
        id
    }

    pub fn flow(&self) -> &[u32] {
        &self.flow
    }

    /// Augments along BFS-shortest paths until the flow value reaches `limit`
    /// or no augmenting path remains. Returns the added value.
    pub fn augment(&mut self, s: VertexId, t: VertexId, limit: u64) -> u64 {
        let mut total = 0u64;
        let mut pred: Vec<u32> = vec![u32::MAX; self.n];
        let mut queue = VecDeque::new();
        while total < limit {
            pred.iter_mut().for_each(|p| *p = u32::MAX);
            queue.clear();
            let mut visited = FixedBitSet::with_capacity(self.n);
            visited.insert(s.index());
            queue.push_back(s.0);
            let mut found = false;
            'bfs: while let Some(v) = queue.pop_front() {
                for &code in &self.adj[v as usize] {
                    let e = (code >> 1) as usize;
                    let (w, open) = if code & 1 == 0 {
                        (self.head[e], self.flow[e] < self.cap[e])
                    } else {
                        (self.tail[e], self.flow[e] > 0)
                    };
                    if !open || visited.contains(w as usize) {
                        continue;
                    }
                    visited.insert(w as usize);
                    pred[w as usize] = code;
                    if w == t.0 {
                        found = true;
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
            if !found {
                break;
            }
            let mut push = (limit - total).min(u64::from(u32::MAX)) as u32;
            let mut v = t.0;
            while v != s.0 {
                let code = pred[v as usize];
                let e = (code >> 1) as usize;
                if code & 1 == 0 {
                    push = push.min(self.cap[e] - self.flow[e]);
                    v = self.tail[e];
                } else {
                    push = push.min(self.flow[e]);
                    v = self.head[e];
                }
            }
            let mut v = t.0;
            while v != s.0 {
                let code = pred[v as usize];
                let e = (code >> 1) as usize;
                if code & 1 == 0 {
                    self.flow[e] += push;
                    v = self.tail[e];
                } else {
                    self.flow[e] -= push;
                    v = self.head[e];
                }
            }
            total += u64::from(push);
        }
        total
    }

    /// Vertices reachable from `s` in the current residual network.
    pub fn residual_reach(&self, s: VertexId) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.n);
        let mut queue = VecDeque::new();
        seen.insert(s.index());
        queue.push_back(s.0);
        while let Some(v) = queue.pop_front() {
            for &code in &self.adj[v as usize] {
                let e = (code >> 1) as usize;
                let (w, open) = if code & 1 == 0 {
                    (self.head[e], self.flow[e] < self.cap[e])
                } else {
                    (self.tail[e], self.flow[e] > 0)
                };
                if open && !seen.contains(w as usize) {
                    seen.insert(w as usize);
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// Integral flow with its capacity vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntFlow {
    pub assignment: Vec<u32>,
    pub value: u64,
    pub capacities: Vec<u32>,
}

impl IntFlow {
    /// Converts to a 0/1 flow. Panics if some edge carries more than one unit.
    pub fn to_unit(&self) -> UnitFlow {
        let mut carries = EdgeSet::empty(self.assignment.len());
        for (i, &x) in self.assignment.iter().enumerate() {
            assert!(x <= 1, "edge e{i} carries {x} units");
            if x == 1 {
                carries.insert(EdgeId(i as u32));
            }
        }
        UnitFlow {
            carries,
            value: self.value as u32,
        }
    }
}

/// 0/1 flow identified with the set of edges carrying one unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitFlow {
    pub carries: EdgeSet,
    pub value: u32,
}

impl UnitFlow {
    pub fn zero(m: usize) -> Self {
        UnitFlow {
            carries: EdgeSet::empty(m),
            value: 0,
        }
    }

    #[inline]
    pub fn on(&self, e: EdgeId) -> bool {
        self.carries.contains(e)
    }

    pub fn as_int(&self) -> Vec<u32> {
        (0..self.carries.universe())
            .map(|i| u32::from(self.carries.contains(EdgeId(i as u32))))
            .collect()
    }
}

pub fn unit_caps(m: usize) -> Vec<u32> {
    vec![1; m]
}

/// Capacity 1 on members of `mask`, 0 elsewhere.
pub fn mask_caps(mask: &EdgeSet) -> Vec<u32> {
    (0..mask.universe())
        .map(|i| u32::from(mask.contains(EdgeId(i as u32))))
        .collect()
}

/// Maximum flow with lowest-EdgeId-first shortest augmenting paths. Unit
/// capacities when `capacities` is `None`.
pub fn max_flow(net: &FlowNetwork, capacities: Option<&[u32]>) -> IntFlow {
    let caps = capacities.map_or_else(|| unit_caps(net.edge_count()), <[u32]>::to_vec);
    max_flow_bounded(&net.graph, net.source, net.sink, &caps, u64::MAX)
}

/// Max-flow that stops once `limit` units are routed.
pub fn max_flow_bounded(
    graph: &DirectedMultigraph,
    s: VertexId,
    t: VertexId,
    caps: &[u32],
    limit: u64,
) -> IntFlow {
    let mut cn = CapNetwork::from_graph(graph, caps);
    let value = cn.augment(s, t, limit);
    IntFlow {
        assignment: cn.flow[..graph.edge_count()].to_vec(),
        value,
        capacities: caps.to_vec(),
    }
}

/// Max-flow value of the subgraph `mask` with unit capacities.
pub fn max_flow_value_in(net: &FlowNetwork, mask: &EdgeSet) -> u64 {
    max_flow_bounded(&net.graph, net.source, net.sink, &mask_caps(mask), u64::MAX).value
}

/// Max-flow from `s` to `t` after merging `u` into `s` and `v` into `t`,
/// capped at `limit`. `None` when the merge identifies `s` with `t`.
pub fn merged_flow_value(
    graph: &DirectedMultigraph,
    s: VertexId,
    t: VertexId,
    caps: &[u32],
    u: VertexId,
    v: VertexId,
    limit: u64,
) -> Option<u64> {
    if u == t || v == s || u == v {
        return None;
    }
    let mut cn = CapNetwork::from_graph(graph, caps);
    cn.add_edge(s, u, INF_CAP);
    cn.add_edge(v, t, INF_CAP);
    Some(cn.augment(s, t, limit))
}

/// Checks capacity and conservation; returns the flow value (net out of `s`).
pub fn check_feasible(
    graph: &DirectedMultigraph,
    s: VertexId,
    t: VertexId,
    caps: &[u32],
    flow: &[u32],
) -> Result<u64, FlowError> {
    if flow.len() != graph.edge_count() || caps.len() != graph.edge_count() {
        return Err(FlowError::LengthMismatch {
            expected: graph.edge_count(),
            found: flow.len(),
        });
    }
    let mut balance = vec![0i64; graph.vertex_count()];
    for e in graph.edge_ids() {
        let x = flow[e.index()];
        if x > caps[e.index()] {
            return Err(FlowError::CapacityViolated(e));
        }
        let (u, v) = graph.endpoints(e);
        balance[u.index()] -= i64::from(x);
        balance[v.index()] += i64::from(x);
    }
    for v in graph.vertices() {
        if v != s && v != t && balance[v.index()] != 0 {
            return Err(FlowError::ConservationViolated(v));
        }
    }
    if balance[s.index()] + balance[t.index()] != 0 || balance[t.index()] < 0 {
        return Err(FlowError::ConservationViolated(t));
    }
    Ok(balance[t.index()] as u64)
}

/// Residual arc: `forward` arcs follow the edge, reverse arcs oppose it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualArc {
    pub edge: EdgeId,
    pub forward: bool,
    pub from: VertexId,
    pub to: VertexId,
}

/// Residual graph of a network under a feasible flow.
///
/// Arcs are numbered edge by edge (forward before reverse), and each vertex's
/// out-list is in arc order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualGraph {
    n: usize,
    arcs: Vec<ResidualArc>,
    out: Vec<Vec<u32>>,
    // Per edge: (forward arc, reverse arc), u32::MAX when absent.
    by_edge: Vec<(u32, u32)>,
}

const NO_ARC: u32 = u32::MAX;

impl ResidualGraph {
    /// Residual of `flow` with capacities `caps`. Fails if the flow is not
    /// feasible.
    pub fn new(
        graph: &DirectedMultigraph,
        s: VertexId,
        t: VertexId,
        caps: &[u32],
        flow: &[u32],
    ) -> Result<Self, FlowError> {
        check_feasible(graph, s, t, caps, flow)?;
        let n = graph.vertex_count();
        let mut arcs = Vec::new();
        let mut out = vec![Vec::new(); n];
        let mut by_edge = vec![(NO_ARC, NO_ARC); graph.edge_count()];
        for e in graph.edge_ids() {
            let (u, v) = graph.endpoints(e);
            let (c, x) = (caps[e.index()], flow[e.index()]);
            if x < c {
                by_edge[e.index()].0 = arcs.len() as u32;
                out[u.index()].push(arcs.len() as u32);
                arcs.push(ResidualArc {
                    edge: e,
                    forward: true,
                    from: u,
                    to: v,
                });
            }
            if x > 0 {
                by_edge[e.index()].1 = arcs.len() as u32;
                out[v.index()].push(arcs.len() as u32);
                arcs.push(ResidualArc {
                    edge: e,
                    forward: false,
                    from: v,
                    to: u,
                });
            }
        }
        Ok(ResidualGraph {
            n,
            arcs,
            out,
            by_edge,
        })
    }

    /// Residual of a 0/1 flow inside the subgraph `mask` (unit capacities).
    pub fn of_unit(net: &FlowNetwork, mask: &EdgeSet, f: &UnitFlow) -> Result<Self, FlowError> {
        ResidualGraph::new(&net.graph, net.source, net.sink, &mask_caps(mask), &f.as_int())
    }

    pub fn arcs(&self) -> &[ResidualArc] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> ResidualArc {
        self.arcs[a]
    }

    pub fn forward_arc(&self, e: EdgeId) -> Option<usize> {
        let a = self.by_edge.get(e.index())?.0;
        (a != NO_ARC).then_some(a as usize)
    }

    pub fn reverse_arc(&self, e: EdgeId) -> Option<usize> {
        let a = self.by_edge.get(e.index())?.1;
        (a != NO_ARC).then_some(a as usize)
    }

    pub fn edge_count(&self) -> usize {
        self.by_edge.len()
    }

    /// Materializes the residual as a multigraph whose edge `i` is arc `i`.
    pub fn to_multigraph(&self) -> DirectedMultigraph {
        DirectedMultigraph::from_edges(self.n, self.arcs.iter().map(|a| (a.from.0, a.to.0)))
    }
}

impl Digraph for ResidualGraph {
    fn node_count(&self) -> usize {
        self.n
    }
    fn arc_count(&self) -> usize {
        self.arcs.len()
    }
    fn arc_endpoints(&self, arc: usize) -> (VertexId, VertexId) {
        let a = &self.arcs[arc];
        (a.from, a.to)
    }
    fn out_arcs(&self, v: VertexId) -> &[u32] {
        &self.out[v.index()]
    }
}

/// Finds a directed cycle among edges with positive flow, as an edge list.
fn find_flow_cycle(graph: &DirectedMultigraph, flow: &[u32]) -> Option<Vec<EdgeId>> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let n = graph.vertex_count();
    let mut color = vec![WHITE; n];
    let mut via: Vec<Option<EdgeId>> = vec![None; n];
    for root in graph.vertices() {
        if color[root.index()] != WHITE {
            continue;
        }
        let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
        color[root.index()] = GREY;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            let outs = graph.out_edges(v);
            if *pos == outs.len() {
                color[v.index()] = BLACK;
                stack.pop();
                continue;
            }
            let e = outs[*pos];
            *pos += 1;
            if flow[e.index()] == 0 {
                continue;
            }
            let w = graph.head(e);
            match color[w.index()] {
                WHITE => {
                    color[w.index()] = GREY;
                    via[w.index()] = Some(e);
                    stack.push((w, 0));
                }
                GREY => {
                    let mut cycle = vec![e];
                    let mut cur = v;
                    while cur != w {
                        let back = via[cur.index()].expect("grey vertex has a tree edge");
                        cycle.push(back);
                        cur = graph.tail(back);
                    }
                    cycle.reverse();
                    return Some(cycle);
                }
                _ => {}
            }
        }
    }
    None
}

/// Removes directed cycles of flow-1 edges until none remain. The value is
/// unchanged.
pub fn cancel_flow_cycles(graph: &DirectedMultigraph, f: &UnitFlow) -> UnitFlow {
    let mut flow = f.as_int();
    while let Some(cycle) = find_flow_cycle(graph, &flow) {
        for e in cycle {
            flow[e.index()] = 0;
        }
    }
    let mut out = f.clone();
    for e in graph.edge_ids() {
        out.carries.set(e, flow[e.index()] == 1);
    }
    out
}

/// Integer version of [`cancel_flow_cycles`]: subtracts the cycle minimum
/// around each cycle in the support until the support is acyclic.
pub fn cancel_int_cycles(graph: &DirectedMultigraph, f: &mut IntFlow) {
    while let Some(cycle) = find_flow_cycle(graph, &f.assignment) {
        let delta = cycle
            .iter()
            .map(|e| f.assignment[e.index()])
            .min()
            .expect("non-empty cycle");
        for e in cycle {
            f.assignment[e.index()] -= delta;
        }
    }
}

pub fn is_acyclic_flow(graph: &DirectedMultigraph, flow: &[u32]) -> bool {
    find_flow_cycle(graph, flow).is_none()
}

/// Splits an acyclic 0/1 flow into edge-disjoint `(s,t)`-paths. Each walk
/// starts at `s` and repeatedly takes the lowest unused flow edge.
pub fn decompose_into_paths(net: &FlowNetwork, f: &UnitFlow) -> Result<Vec<Vec<EdgeId>>, FlowError> {
    let g = &net.graph;
    let flow = f.as_int();
    if !is_acyclic_flow(g, &flow) {
        return Err(FlowError::Cyclic);
    }
    let mut used = EdgeSet::empty(g.edge_count());
    let mut next = vec![0usize; g.vertex_count()];
    let mut paths = Vec::with_capacity(f.value as usize);
    for _ in 0..f.value {
        let mut path = Vec::new();
        let mut v = net.source;
        while v != net.sink {
            let outs = g.out_edges(v);
            let mut chosen = None;
            while next[v.index()] < outs.len() {
                let e = outs[next[v.index()]];
                next[v.index()] += 1;
                if f.on(e) && !used.contains(e) {
                    chosen = Some(e);
                    break;
                }
            }
            let e = chosen.ok_or(FlowError::ConservationViolated(v))?;
            used.insert(e);
            path.push(e);
            v = g.head(e);
        }
        paths.push(path);
    }
    if used != f.carries {
        return Err(FlowError::ConservationViolated(net.source));
    }
    Ok(paths)
}

/// Circulation problem with demands and lower/upper edge bounds. A solution
/// `g` satisfies `lower <= g <= upper` and `in(v) - out(v) = demand(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CirculationInstance {
    pub graph: DirectedMultigraph,
    pub demand: Vec<i64>,
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
}

impl CirculationInstance {
    pub fn is_solution(&self, g: &[u32]) -> bool {
        if g.len() != self.graph.edge_count() {
            return false;
        }
        let mut bal = vec![0i64; self.graph.vertex_count()];
        for e in self.graph.edge_ids() {
            let x = g[e.index()];
            if x < self.lower[e.index()] || x > self.upper[e.index()] {
                return false;
            }
            let (u, v) = self.graph.endpoints(e);
            bal[u.index()] -= i64::from(x);
            bal[v.index()] += i64::from(x);
        }
        bal == self.demand
    }
}

/// Feasible circulation via the super-source/super-sink reduction: route the
/// lower bounds, turn the leftover imbalance into supply/demand arcs, and
/// accept iff the max-flow saturates them.
pub fn solve_circulation(inst: &CirculationInstance) -> Option<Vec<u32>> {
    let g = &inst.graph;
    let n = g.vertex_count();
    if inst.demand.iter().sum::<i64>() != 0 {
        return None;
    }
    if inst.lower.iter().zip(&inst.upper).any(|(l, u)| l > u) {
        return None;
    }
    // delta(v) = demand still to satisfy once lower bounds are routed.
    let mut delta = inst.demand.clone();
    for e in g.edge_ids() {
        let (u, v) = g.endpoints(e);
        let l = i64::from(inst.lower[e.index()]);
        delta[v.index()] -= l;
        delta[u.index()] += l;
    }
    let caps: Vec<u32> = g
        .edge_ids()
        .map(|e| inst.upper[e.index()] - inst.lower[e.index()])
        .collect();
    let mut cn = CapNetwork::new(n + 2);
    for e in g.edge_ids() {
        let (u, v) = g.endpoints(e);
        cn.add_edge(u, v, caps[e.index()]);
    }
    let (ss, tt) = (VertexId(n as u32), VertexId(n as u32 + 1));
    let mut need = 0u64;
    for v in g.vertices() {
        let d = delta[v.index()];
        if d > 0 {
            cn.add_edge(v, tt, d as u32);
            need += d as u64;
        } else if d < 0 {
            cn.add_edge(ss, v, (-d) as u32);
        }
    }
    let got = cn.augment(ss, tt, need);
    if got != need {
        return None;
    }
    let sol: Vec<u32> = g
        .edge_ids()
        .map(|e| cn.flow()[e.index()] + inst.lower[e.index()])
        .collect();
    debug_assert!(inst.is_solution(&sol));
    Some(sol)
}

/// Cut-condition feasibility check by enumerating every bipartition.
pub fn hoffman_feasible(inst: &CirculationInstance) -> Result<bool, FlowError> {
    const LIMIT: usize = 20;
    let g = &inst.graph;
    let n = g.vertex_count();
    if n > LIMIT {
        return Err(FlowError::TooLarge { n, limit: LIMIT });
    }
    if inst.demand.iter().sum::<i64>() != 0 {
        return Ok(false);
    }
    if inst.lower.iter().zip(&inst.upper).any(|(l, u)| l > u) {
        return Ok(false);
    }
    for b_mask in 0u32..(1u32 << n) {
        let in_b = |v: VertexId| b_mask >> v.0 & 1 == 1;
        let d_b: i64 = g.vertices().filter(|&v| in_b(v)).map(|v| inst.demand[v.index()]).sum();
        let mut lower_ba = 0i64;
        let mut upper_ab = 0i64;
        for e in g.edge_ids() {
            let (u, v) = g.endpoints(e);
            match (in_b(u), in_b(v)) {
                (true, false) => lower_ba += i64::from(inst.lower[e.index()]),
                (false, true) => upper_ab += i64::from(inst.upper[e.index()]),
                _ => {}
            }
        }
        if d_b + lower_ba > upper_ab {
            return Ok(false);
        }
    }
    Ok(true)
}
