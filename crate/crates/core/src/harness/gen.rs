//! Deterministic instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedMultigraph, EdgeId, FlowNetwork, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    /// Layered DAG with extra forward, backward, and parallel edges. Every
    /// internal vertex lies on an `(s,t)`-path.
    Random { n: usize, m: usize, seed: u64 },
    Diamond,
    /// `λ` parallel `s->x` edges and `λ+1` parallel `x->t` edges.
    Bottleneck { lambda: u32 },
    /// Two paths sharing endpoints with rungs `x_i -> y_i`; `L = (n-2)/2`.
    TwoPaths { n: usize },
    /// `2r` disjoint paths of `L` internal vertices with rungs
    /// `x_{k,i} -> y_{k,j}` wherever bit `(i,j)` of matrix `k` is set.
    Matrix { r: usize, l: usize, seed: u64 },
}

pub fn gen(spec: &GeneratorSpec) -> Result<FlowNetwork> {
    match *spec {
        GeneratorSpec::Random { n, m, seed } => random(n, m, seed),
        GeneratorSpec::Diamond => Ok(diamond()),
        GeneratorSpec::Bottleneck { lambda } => bottleneck(lambda),
        GeneratorSpec::TwoPaths { n } => two_paths(n).map(|(net, _)| net),
        GeneratorSpec::Matrix { r, l, seed } => {
            let bits = matrix_bits(r, l, seed);
            matrix(r, l, &bits).map(|(net, _)| net)
        }
    }
}

fn network(g: DirectedMultigraph, s: u32, t: u32) -> FlowNetwork {
    FlowNetwork::new(g, VertexId(s), VertexId(t)).expect("generators keep s != t in range")
}

pub fn diamond() -> FlowNetwork {
    network(DirectedMultigraph::from_edges(4, [(0, 1), (1, 3), (0, 2), (2, 3)]), 0, 3)
}

pub fn bottleneck(lambda: u32) -> Result<FlowNetwork> {
    if lambda == 0 {
        return Err(Error::Precondition("bottleneck needs λ >= 1".into()));
    }
    let mut g = DirectedMultigraph::new(3);
    for _ in 0..lambda {
        g.add_edge(VertexId(0), VertexId(1));
    }
    for _ in 0..=lambda {
        g.add_edge(VertexId(1), VertexId(2));
    }
    Ok(network(g, 0, 2))
}

/// Random layered network. At least one in-edge from a lower layer and one
/// out-edge to a higher layer per internal vertex; the remaining `m` budget
/// is split between forward edges, backedges, and parallel copies.
pub fn random(n: usize, m: usize, seed: u64) -> Result<FlowNetwork> {
    if n < 2 {
        return Err(Error::Precondition("random network needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = n - 1;
    let depth = ((n - 2) / 3).max(1);
    let mut layer = vec![0usize; n];
    layer[t] = depth + 1;
    for l in layer.iter_mut().take(t).skip(1) {
        *l = rng.gen_range(1..=depth);
    }
    let mut g = DirectedMultigraph::new(n);
    let pick = |rng: &mut ChaCha8Rng, pred: &dyn Fn(usize) -> bool| -> Option<usize> {
        let cands: Vec<usize> = (0..n).filter(|&w| pred(w)).collect();
        (!cands.is_empty()).then(|| cands[rng.gen_range(0..cands.len())])
    };
    for v in 1..t {
        let u = pick(&mut rng, &|w| layer[w] < layer[v]).expect("source is in layer 0");
        g.add_edge(VertexId(u as u32), VertexId(v as u32));
        let w = pick(&mut rng, &|w| layer[w] > layer[v]).expect("sink is in the top layer");
        g.add_edge(VertexId(v as u32), VertexId(w as u32));
    }
    if n == 2 || rng.gen_bool(0.5) {
        g.add_edge(VertexId(0), VertexId(t as u32));
    }
    while g.edge_count() < m {
        let roll: f64 = rng.gen();
        if roll < 0.7 || g.edge_count() == 0 {
            let u = rng.gen_range(0..t);
            if let Some(w) = pick(&mut rng, &|w| layer[w] > layer[u]) {
                g.add_edge(VertexId(u as u32), VertexId(w as u32));
            }
        } else if roll < 0.85 {
            let u = rng.gen_range(1..=t);
            if let Some(w) = pick(&mut rng, &|w| w != 0 && w != u && layer[w] <= layer[u]) {
                g.add_edge(VertexId(u as u32), VertexId(w as u32));
            }
        } else {
            let e = EdgeId(rng.gen_range(0..g.edge_count()) as u32);
            let (u, v) = g.endpoints(e);
            g.add_edge(u, v);
        }
    }
    Ok(network(g, 0, t as u32))
}

/// Edge ids of the two-path construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoPathsLayout {
    pub l: usize,
    /// `x_edges[i-1]` is `(x_i, x_{i+1})` for `i` in `1..L`.
    pub x_edges: Vec<EdgeId>,
    /// `y_edges[i-1]` is `(y_i, y_{i+1})` for `i` in `1..L`.
    pub y_edges: Vec<EdgeId>,
}

impl TwoPathsLayout {
    /// Failure pair after which exactly one `(s,t)`-path survives, for
    /// `i` in `1..=L`: the pure `Y` path for `i = 1`, the path switching at
    /// rung `i` in between, and the pure `X` path for `i = L`.
    pub fn survivor_failures(&self, i: usize) -> (EdgeId, EdgeId) {
        let l = self.l;
        assert!((1..=l).contains(&i));
        if i == 1 {
            (self.x_edges[0], self.x_edges[1.min(l - 2)])
        } else if i == l {
            (self.y_edges[l - 2], self.y_edges[(l - 2).saturating_sub(1)])
        } else {
            (self.x_edges[i - 1], self.y_edges[i - 2])
        }
    }
}

/// The two-path network on `2L` vertices, `L = (n-2)/2`: the shared
/// endpoints `x_1 = y_1` and `x_L = y_L` leave two vertices of the nominal
/// `n` unused.
pub fn two_paths(n: usize) -> Result<(FlowNetwork, TwoPathsLayout)> {
    if n < 8 || n % 2 == 1 {
        return Err(Error::Precondition("two-path network needs even n >= 8".into()));
    }
    let l = (n - 2) / 2;
    // s = 0, x_1 = 1, x_2..x_{L-1} = 2..L-1, y_2..y_{L-1} = L..2L-3,
    // x_L = 2L-2, t = 2L-1.
    let s = 0u32;
    let first = 1u32;
    let last = (2 * l - 2) as u32;
    let t = (2 * l - 1) as u32;
    let x = |i: usize| match i {
        1 => first,
        i if i == l => last,
        i => i as u32,
    };
    let y = |i: usize| match i {
        1 => first,
        i if i == l => last,
        i => (l + i - 2) as u32,
    };
    let mut g = DirectedMultigraph::new(2 * l);
    g.add_edge(VertexId(s), VertexId(first));
    let x_edges = (1..l).map(|i| g.add_edge(VertexId(x(i)), VertexId(x(i + 1)))).collect();
    let y_edges = (1..l).map(|i| g.add_edge(VertexId(y(i)), VertexId(y(i + 1)))).collect();
    for i in 2..l {
        g.add_edge(VertexId(x(i)), VertexId(y(i)));
    }
    g.add_edge(VertexId(last), VertexId(t));
    Ok((network(g, s, t), TwoPathsLayout { l, x_edges, y_edges }))
}

/// Edge ids of the matrix construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixLayout {
    pub r: usize,
    pub l: usize,
    x_path: Vec<Vec<EdgeId>>,
    y_path: Vec<Vec<EdgeId>>,
}

impl MatrixLayout {
    /// `(x_{k,i}, x_{k+1,i})` with `x_{0,i} = s`, `x_{L+1,i} = t`;
    /// `i` in `0..r`, `k` in `0..=L`.
    pub fn x_edge(&self, i: usize, k: usize) -> EdgeId {
        self.x_path[i][k]
    }

    pub fn y_edge(&self, j: usize, k: usize) -> EdgeId {
        self.y_path[j][k]
    }

    /// Failure pair whose dual min-cut answer encodes bit `(i,j)` of matrix
    /// `k` (`k` in `1..=L`).
    pub fn decode_pair(&self, k: usize, i: usize, j: usize) -> (EdgeId, EdgeId) {
        (self.x_edge(i, k), self.y_edge(j, k - 1))
    }
}

/// Bit `(i,j)` of matrix `k` (`k` in `1..=L`) at `(k-1)*r*r + i*r + j`.
pub fn matrix_bits(r: usize, l: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..r * r * l).map(|_| rng.gen_bool(0.5)).collect()
}

pub fn matrix_bit(bits: &[bool], r: usize, k: usize, i: usize, j: usize) -> bool {
    bits[(k - 1) * r * r + i * r + j]
}

pub fn matrix(r: usize, l: usize, bits: &[bool]) -> Result<(FlowNetwork, MatrixLayout)> {
    if r == 0 || l == 0 || bits.len() != r * r * l {
        return Err(Error::Precondition("matrix network needs r, L >= 1 and r*r*L bits".into()));
    }
    let n = 2 * r * l + 2;
    let (s, t) = (0u32, (n - 1) as u32);
    let xv = |k: usize, i: usize| (1 + i * l + (k - 1)) as u32;
    let yv = |k: usize, j: usize| (1 + r * l + j * l + (k - 1)) as u32;
    let mut g = DirectedMultigraph::new(n);
    let path = |g: &mut DirectedMultigraph, v: &dyn Fn(usize) -> u32| -> Vec<EdgeId> {
        let mut ids = vec![g.add_edge(VertexId(s), VertexId(v(1)))];
        for k in 1..l {
            ids.push(g.add_edge(VertexId(v(k)), VertexId(v(k + 1))));
        }
        ids.push(g.add_edge(VertexId(v(l)), VertexId(t)));
        ids
    };
    let x_path: Vec<Vec<EdgeId>> = (0..r).map(|i| path(&mut g, &|k| xv(k, i))).collect();
    let y_path: Vec<Vec<EdgeId>> = (0..r).map(|j| path(&mut g, &|k| yv(k, j))).collect();
    for k in 1..=l {
        for i in 0..r {
            for j in 0..r {
                if matrix_bit(bits, r, k, i, j) {
                    g.add_edge(VertexId(xv(k, i)), VertexId(yv(k, j)));
                }
            }
        }
    }
    Ok((network(g, s, t), MatrixLayout { r, l, x_path, y_path }))
}
