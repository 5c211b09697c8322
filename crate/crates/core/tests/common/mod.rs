#![allow(dead_code)]

use flowsentry_core::graph::{parse_network, EdgeId, FlowNetwork};
use flowsentry_core::harness::brute::brute_force;
use flowsentry_core::harness::gen::{bottleneck, diamond, matrix, matrix_bits, random, two_paths};

/// Cycle through the middle vertices, a backedge into the source, and a
/// parallel pair.
const CYCLIC: &str = "\
p 5 9 1 5
e 1 2
e 1 3
e 2 3
e 3 2
e 2 5
e 3 4
e 4 5
e 4 1
e 4 5
";

/// Vertex 5 is unreachable from s, vertex 6 cannot reach t, and there is a
/// self-loop.
const DANGLING: &str = "\
p 7 10 1 4
e 1 2
e 2 4
e 1 3
e 3 4
e 5 2
e 2 6
e 6 6
e 3 3
e 1 4
e 4 7
";

/// Two strips joined by a non-critical edge between equivalence classes.
const STRIPS: &str = "\
p 8 12 1 8
e 1 2
e 1 3
e 2 4
e 3 5
e 4 5
e 4 6
e 5 7
e 6 8
e 7 8
e 2 3
e 6 7
e 7 6
";

pub fn fixtures() -> Vec<(String, FlowNetwork)> {
    let mut out = vec![("diamond".to_string(), diamond())];
    for lambda in 1..=4 {
        out.push((format!("bottleneck({lambda})"), bottleneck(lambda).unwrap()));
    }
    for n in [8, 10, 12] {
        out.push((format!("twopaths({n})"), two_paths(n).unwrap().0));
    }
    let bits = matrix_bits(2, 2, 7);
    out.push(("matrix(2,2,7)".to_string(), matrix(2, 2, &bits).unwrap().0));
    for (name, text) in [("cyclic", CYCLIC), ("dangling", DANGLING), ("strips", STRIPS)] {
        out.push((name.to_string(), parse_network(text).unwrap()));
    }
    out
}

/// Seeded random networks with `λ` in `lo..=hi`, skipping seeds that miss.
pub fn random_with_lambda(
    count: usize,
    n_range: (usize, usize),
    density: (usize, usize),
    lambda: (u32, u32),
    seed0: u64,
) -> Vec<(u64, FlowNetwork)> {
    let mut out = Vec::with_capacity(count);
    let mut seed = seed0;
    while out.len() < count {
        let n = n_range.0 + (seed as usize % (n_range.1 - n_range.0 + 1));
        let m = n * density.0 + (seed as usize / 7) % (n * (density.1 - density.0) + 1);
        let net = random(n, m, seed).unwrap();
        let l = brute_force(&net, &[]).value;
        if (lambda.0..=lambda.1).contains(&l) {
            out.push((seed, net));
        }
        seed += 1;
    }
    out
}

pub fn edges(net: &FlowNetwork) -> Vec<EdgeId> {
    net.graph.edge_ids().collect()
}

/// Whether `C` is inclusion-minimal among `(s,t)`-cuts: every proper
/// subset obtained by dropping one edge leaves an `(s,t)`-path.
pub fn is_minimal_cut(net: &FlowNetwork, cut: &[EdgeId]) -> bool {
    if brute_force(net, cut).value != 0 {
        return false;
    }
    (0..cut.len()).all(|i| {
        let rest: Vec<EdgeId> = cut.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &e)| e).collect();
        brute_force(net, &rest).value > 0
    })
}

/// Value of the 0/1 flow `carries` in `G - failed`, or `None` if it uses a
/// failed edge or breaks conservation.
pub fn unit_flow_value(net: &FlowNetwork, carries: impl Fn(EdgeId) -> bool, failed: &[EdgeId]) -> Option<u32> {
    let g = &net.graph;
    let mut balance = vec![0i64; g.vertex_count()];
    for e in g.edge_ids() {
        if carries(e) {
            if failed.contains(&e) {
                return None;
            }
            let (u, v) = g.endpoints(e);
            balance[u.index()] -= 1;
            balance[v.index()] += 1;
        }
    }
    for v in g.vertices() {
        if v != net.source && v != net.sink && balance[v.index()] != 0 {
            return None;
        }
    }
    let out = -balance[net.source.index()];
    (out >= 0 && balance[net.sink.index()] == out).then_some(out as u32)
}
