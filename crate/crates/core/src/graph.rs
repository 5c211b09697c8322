//! Directed multigraphs with stable edge identities, the text graph format,
//! and the elementary traversals every other module builds on.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense 0-based vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Dense 0-based edge index. Parallel edges get distinct ids; the id order is
/// the order of the `e` lines in the input file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A set of edge ids backed by a bitset sized to the edge count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSet(FixedBitSet);

impl EdgeSet {
    pub fn empty(m: usize) -> Self {
        EdgeSet(FixedBitSet::with_capacity(m))
    }

    pub fn full(m: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(m);
        bits.insert_range(..);
        EdgeSet(bits)
    }

    pub fn from_ids(m: usize, ids: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut set = Self::empty(m);
        for e in ids {
            set.insert(e);
        }
        set
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.contains(e.index())
    }

    #[inline]
    pub fn insert(&mut self, e: EdgeId) {
        self.0.insert(e.index());
    }

    #[inline]
    pub fn remove(&mut self, e: EdgeId) {
        self.0.set(e.index(), false);
    }

    pub fn set(&mut self, e: EdgeId, present: bool) {
        self.0.set(e.index(), present);
    }

    /// Size of the id universe, not the number of members.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.ones().map(|i| EdgeId(i as u32))
    }

    pub fn to_vec(&self) -> Vec<EdgeId> {
        self.iter().collect()
    }

    pub fn symmetric_difference(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.symmetric_difference(&other.0).collect())
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

/// Directed multigraph with per-vertex incidence lists.
///
/// `out_adj[v]` and `in_adj[v]` list edge ids in increasing order, and every
/// edge appears exactly once in its tail's out-list and once in its head's
/// in-list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedMultigraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
}

impl DirectedMultigraph {
    pub fn new(n: usize) -> Self {
        DirectedMultigraph {
            n,
            edges: Vec::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from 0-based endpoint pairs.
    ///
    /// Panics if an endpoint is out of range; use [`parse_network`] for
    /// untrusted input.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(VertexId(u), VertexId(v));
        }
        g
    }

    pub fn add_edge(&mut self, tail: VertexId, head: VertexId) -> EdgeId {
        assert!(tail.index() < self.n && head.index() < self.n, "endpoint out of range");
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push((tail, head));
        self.out_adj[tail.index()].push(id);
        self.in_adj[head.index()].push(id);
        id
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e.index()]
    }

    #[inline]
    pub fn tail(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].0
    }

    #[inline]
    pub fn head(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].1
    }

    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_adj[v.index()]
    }

    #[inline]
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_adj[v.index()]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n as u32).map(VertexId)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        e.index() < self.edges.len()
    }
}

/// Read-only view over anything with numbered arcs, so the traversal and SCC
/// routines can run on both multigraphs and residual graphs.
pub trait Digraph {
    fn node_count(&self) -> usize;
    fn arc_count(&self) -> usize;
    fn arc_endpoints(&self, arc: usize) -> (VertexId, VertexId);
    fn out_arcs(&self, v: VertexId) -> &[u32];
}

/// Arc-numbered out-adjacency of a multigraph (arc index = edge index).
#[derive(Clone, Debug)]
pub struct ArcView<'a> {
    graph: &'a DirectedMultigraph,
    out: Vec<Vec<u32>>,
}

impl<'a> ArcView<'a> {
    pub fn new(graph: &'a DirectedMultigraph) -> Self {
        let out = graph
            .out_adj
            .iter()
            .map(|list| list.iter().map(|e| e.0).collect())
            .collect();
        ArcView { graph, out }
    }
}

impl Digraph for ArcView<'_> {
    fn node_count(&self) -> usize {
        self.graph.n
    }
    fn arc_count(&self) -> usize {
        self.graph.edges.len()
    }
    fn arc_endpoints(&self, arc: usize) -> (VertexId, VertexId) {
        self.graph.edges[arc]
    }
    fn out_arcs(&self, v: VertexId) -> &[u32] {
        &self.out[v.index()]
    }
}

/// Vertices reachable from `from` using only arcs accepted by `allow`.
pub fn reachable_set<G: Digraph + ?Sized>(
    g: &G,
    from: VertexId,
    mut allow: impl FnMut(usize) -> bool,
) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(g.node_count());
    let mut queue = VecDeque::new();
    seen.insert(from.index());
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        for &a in g.out_arcs(v) {
            let a = a as usize;
            if !allow(a) {
                continue;
            }
            let (_, w) = g.arc_endpoints(a);
            if !seen.contains(w.index()) {
                seen.insert(w.index());
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Breadth-first search returning the arc sequence of a shortest `from -> to`
/// path, scanning each vertex's arcs in stored order.
pub fn find_path<G: Digraph + ?Sized>(
    g: &G,
    from: VertexId,
    to: VertexId,
    mut allow: impl FnMut(usize) -> bool,
) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let n = g.node_count();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = FixedBitSet::with_capacity(n);
    let mut queue = VecDeque::new();
    seen.insert(from.index());
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        for &a in g.out_arcs(v) {
            let a = a as usize;
            if !allow(a) {
                continue;
            }
            let (_, w) = g.arc_endpoints(a);
            if seen.contains(w.index()) {
                continue;
            }
            seen.insert(w.index());
            parent[w.index()] = Some(a);
            if w == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let arc = parent[cur.index()].expect("bfs parent chain");
                    path.push(arc);
                    cur = g.arc_endpoints(arc).0;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(w);
        }
    }
    None
}

/// True iff `y` is reachable from `x` in `g` minus the optional excluded edge.
pub fn reaches(g: &DirectedMultigraph, x: VertexId, y: VertexId, excluded: Option<EdgeId>) -> bool {
    let view = ArcView::new(g);
    let skip = excluded.map(|e| e.index());
    reachable_set(&view, x, |a| Some(a) != skip).contains(y.index())
}

/// Strongly connected component labels, restricted to the arcs accepted by
/// `allow`.
///
/// Labels are dense and numbered in order of each component's smallest vertex,
/// so identical inputs always produce identical labellings.
pub fn scc_labels_filtered<G: Digraph + ?Sized>(g: &G, allow: impl Fn(usize) -> bool) -> Vec<u32> {
    // Iterative Tarjan.
    const UNVISITED: u32 = u32::MAX;
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = FixedBitSet::with_capacity(n);
    let mut stack: Vec<u32> = Vec::new();
    let mut raw = vec![UNVISITED; n];
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    let mut call: Vec<(u32, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack.insert(root);

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let arcs = g.out_arcs(VertexId(v));
            if *pos < arcs.len() {
                let a = arcs[*pos] as usize;
                *pos += 1;
                if !allow(a) {
                    continue;
                }
                let w = g.arc_endpoints(a).1.index();
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack.insert(w);
                    call.push((w as u32, 0));
                } else if on_stack.contains(w) {
                    low[v as usize] = low[v as usize].min(index[w]);
                }
            } else {
                call.pop();
                let v = v as usize;
                if let Some(&(parent, _)) = call.last() {
                    let p = parent as usize;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack") as usize;
                        on_stack.set(w, false);
                        raw[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }

    // Renumber by smallest contained vertex.
    let mut remap = vec![UNVISITED; next_comp as usize];
    let mut next = 0u32;
    for &c in &raw[..n] {
        let c = c as usize;
        if remap[c] == UNVISITED {
            remap[c] = next;
            next += 1;
        }
    }
    raw.iter().map(|&c| remap[c as usize]).collect()
}

pub fn scc_labels<G: Digraph + ?Sized>(g: &G) -> Vec<u32> {
    scc_labels_filtered(g, |_| true)
}

/// Component id per vertex; ids are dense and ordered by smallest vertex.
pub fn strongly_connected_components(g: &DirectedMultigraph) -> Vec<u32> {
    scc_labels(&ArcView::new(g))
}

/// Unit-capacity directed multigraph with a distinguished source and sink.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub graph: DirectedMultigraph,
    pub source: VertexId,
    pub sink: VertexId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { line: usize, vertex: u64, n: usize },
    #[error("source equals sink")]
    SourceEqualsSink,
    #[error("missing `p` header line")]
    MissingHeader,
    #[error("header declares {expected} edges but {found} `e` lines were read")]
    EdgeCountMismatch { expected: usize, found: usize },
}

impl FlowNetwork {
    pub fn new(graph: DirectedMultigraph, source: VertexId, sink: VertexId) -> Result<Self, ParseError> {
        if source == sink {
            return Err(ParseError::SourceEqualsSink);
        }
        for v in [source, sink] {
            if v.index() >= graph.vertex_count() {
                return Err(ParseError::VertexOutOfRange {
                    line: 0,
                    vertex: v.0 as u64 + 1,
                    n: graph.vertex_count(),
                });
            }
        }
        Ok(FlowNetwork { graph, source, sink })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Serializes in the `p`/`e` text format, edges in id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "p {} {} {} {}",
            self.graph.vertex_count(),
            self.graph.edge_count(),
            self.source.0 + 1,
            self.sink.0 + 1
        );
        for (u, v) in &self.graph.edges {
            let _ = writeln!(out, "e {} {}", u.0 + 1, v.0 + 1);
        }
        out
    }
}

fn parse_field(line: usize, tok: Option<&str>, what: &str) -> Result<u64, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::Malformed {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse::<u64>().map_err(|_| ParseError::Malformed {
        line,
        message: format!("invalid {what} `{tok}`"),
    })
}

fn vertex_in_range(line: usize, raw: u64, n: usize) -> Result<VertexId, ParseError> {
    if raw == 0 || raw > n as u64 {
        return Err(ParseError::VertexOutOfRange { line, vertex: raw, n });
    }
    Ok(VertexId((raw - 1) as u32))
}

/// Parses the text graph format:
///
/// ```text
/// # comment
/// p <n> <m> <s> <t>
/// e <u> <v>        (m lines, 1-based vertices)
/// ```
pub fn parse_network(text: &str) -> Result<FlowNetwork, ParseError> {
    let mut header: Option<(usize, usize, VertexId, VertexId)> = None;
    let mut graph = DirectedMultigraph::new(0);
    let mut header_line = 0;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let kind = toks.next().unwrap_or_default();
        match kind {
            "p" => {
                if header.is_some() {
                    return Err(ParseError::Malformed {
                        line,
                        message: "duplicate `p` header".into(),
                    });
                }
                let n = parse_field(line, toks.next(), "vertex count")? as usize;
                let m = parse_field(line, toks.next(), "edge count")? as usize;
                let s = parse_field(line, toks.next(), "source")?;
                let t = parse_field(line, toks.next(), "sink")?;
                if toks.next().is_some() {
                    return Err(ParseError::Malformed {
                        line,
                        message: "trailing tokens after header".into(),
                    });
                }
                let s = vertex_in_range(line, s, n)?;
                let t = vertex_in_range(line, t, n)?;
                if s == t {
                    return Err(ParseError::SourceEqualsSink);
                }
                graph = DirectedMultigraph::new(n);
                header = Some((n, m, s, t));
                header_line = line;
            }
            "e" => {
                let Some((n, _, _, _)) = header else {
                    return Err(ParseError::MissingHeader);
                };
                let u = parse_field(line, toks.next(), "tail")?;
                let v = parse_field(line, toks.next(), "head")?;
                if toks.next().is_some() {
                    return Err(ParseError::Malformed {
                        line,
                        message: "trailing tokens after edge".into(),
                    });
                }
                let u = vertex_in_range(line, u, n)?;
                let v = vertex_in_range(line, v, n)?;
                graph.add_edge(u, v);
            }
            other => {
                return Err(ParseError::Malformed {
                    line,
                    message: format!("unknown line type `{other}`"),
                })
            }
        }
    }

    let (_, m, s, t) = header.ok_or(ParseError::MissingHeader)?;
    if graph.edge_count() != m {
        log::debug!("header on line {header_line} declared {m} edges");
        return Err(ParseError::EdgeCountMismatch {
            expected: m,
            found: graph.edge_count(),
        });
    }
    Ok(FlowNetwork {
        graph,
        source: s,
        sink: t,
    })
}

/// Result of restricting a network to the part that can carry `(s,t)`-flow.
///
/// Vertex and edge ids are never renumbered; the kept part is described by
/// masks over the original id space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StPruning {
    /// Edges with tail reachable from `s` and head reaching `t` (self-loops
    /// excluded).
    pub kept: EdgeSet,
    pub removed: PrunedEdgeSet,
    /// Vertices reachable from `s` that also reach `t`.
    pub kept_vertices: FixedBitSet,
    /// Vertices that reach `t` in the original graph. Used to place dropped
    /// vertices on a cut side without adding crossing edges.
    pub reaches_sink: FixedBitSet,
    /// `t` is unreachable from `s`: the max-flow is 0 and every failure query
    /// answers 0.
    pub empty: bool,
}

/// Edge ids removed by pruning, in increasing order. Failures of these edges
/// have no effect on any flow or cut value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedEdgeSet(pub Vec<EdgeId>);

impl PrunedEdgeSet {
    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.binary_search(&e).is_ok()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl StPruning {
    pub fn kept_vertex_count(&self) -> usize {
        self.kept_vertices.count_ones(..)
    }

    pub fn keeps_vertex(&self, v: VertexId) -> bool {
        self.kept_vertices.contains(v.index())
    }

    /// Side a dropped vertex takes in a reported cut partition: vertices that
    /// cannot reach `t` go with the source side, the rest with the sink side.
    /// Either way no extra edge crosses from source side to sink side.
    pub fn dropped_vertex_on_source_side(&self, v: VertexId) -> bool {
        !self.reaches_sink.contains(v.index())
    }
}

/// Keeps exactly the vertices reachable from `s` that reach `t`, and the
/// edges lying on some `(s,t)`-walk.
pub fn prune_to_st_paths(net: &FlowNetwork) -> StPruning {
    prune_within(net, &EdgeSet::full(net.edge_count()))
}

/// [`prune_to_st_paths`] on the subgraph formed by `scope`.
pub fn prune_within(net: &FlowNetwork, scope: &EdgeSet) -> StPruning {
    let g = &net.graph;
    let n = g.vertex_count();
    let m = g.edge_count();
    let usable = |e: usize| scope.contains(EdgeId(e as u32)) && g.edges[e].0 != g.edges[e].1;

    let fwd = ArcView::new(g);
    let from_s = reachable_set(&fwd, net.source, usable);
    let rev = ReverseView::new(g);
    let to_t = reachable_set(&rev, net.sink, usable);

    let mut kept = EdgeSet::empty(m);
    let mut removed = Vec::new();
    for e in g.edge_ids() {
        let (u, v) = g.endpoints(e);
        if usable(e.index()) && from_s.contains(u.index()) && to_t.contains(v.index()) {
            kept.insert(e);
        } else {
            removed.push(e);
        }
    }
    let mut kept_vertices = from_s.clone();
    kept_vertices.intersect_with(&to_t);

    let all = EdgeSet::full(m);
    let reaches_sink = reachable_set(&rev, net.sink, |e| all.contains(EdgeId(e as u32)));
    let empty = !from_s.contains(net.sink.index());
    if empty {
        kept = EdgeSet::empty(m);
        removed = g.edge_ids().collect();
        kept_vertices = FixedBitSet::with_capacity(n);
    }
    StPruning {
        kept,
        removed: PrunedEdgeSet(removed),
        kept_vertices,
        reaches_sink,
        empty,
    }
}

/// Reversed arc view of a multigraph.
pub struct ReverseView<'a> {
    graph: &'a DirectedMultigraph,
    inn: Vec<Vec<u32>>,
}

impl<'a> ReverseView<'a> {
    pub fn new(graph: &'a DirectedMultigraph) -> Self {
        let inn = graph
            .in_adj
            .iter()
            .map(|list| list.iter().map(|e| e.0).collect())
            .collect();
        ReverseView { graph, inn }
    }
}

impl Digraph for ReverseView<'_> {
    fn node_count(&self) -> usize {
        self.graph.n
    }
    fn arc_count(&self) -> usize {
        self.graph.edges.len()
    }
    fn arc_endpoints(&self, arc: usize) -> (VertexId, VertexId) {
        let (u, v) = self.graph.edges[arc];
        (v, u)
    }
    fn out_arcs(&self, v: VertexId) -> &[u32] {
        &self.inn[v.index()]
    }
}
