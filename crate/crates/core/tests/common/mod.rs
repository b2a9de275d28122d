//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use gme_circuits::density::ReducedDensityMatrix;
use gme_circuits::graph::{EdgeKind, SpacetimeGraph};
use gme_circuits::state::C64;
use nalgebra::DMatrix;
use rand::Rng;

pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Bit of `site` in a basis index of an `n`-site register (site 0 leftmost).
fn bit(index: usize, site: usize, n: usize) -> usize {
    (index >> (n - 1 - site)) & 1
}

/// Reduced matrix of `keep` by summing `psi_i conj(psi_j)` over every pair
/// of basis states that agree on the traced sites.
pub fn partial_trace_oracle(amps: &[C64], n: usize, keep: &[usize]) -> DMatrix<C64> {
    let d = 1usize << keep.len();
    let mut rho = DMatrix::from_element(d, d, ZERO);
    let env: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let local = |i: usize| keep.iter().fold(0, |acc, &s| (acc << 1) | bit(i, s, n));
    for i in 0..amps.len() {
        for j in 0..amps.len() {
            if env.iter().all(|&s| bit(i, s, n) == bit(j, s, n)) {
                rho[(local(i), local(j))] += amps[i] * amps[j].conj();
            }
        }
    }
    rho
}

/// Partial transpose on spin set `a` by explicit bit-vector exchange.
pub fn partial_transpose_oracle(rho: &DMatrix<C64>, m: usize, a: &[usize]) -> DMatrix<C64> {
    let d = 1usize << m;
    let mut out = DMatrix::from_element(d, d, ZERO);
    for r in 0..d {
        for c in 0..d {
            let mut rb: Vec<usize> = (0..m).map(|s| bit(r, s, m)).collect();
            let mut cb: Vec<usize> = (0..m).map(|s| bit(c, s, m)).collect();
            for &s in a {
                std::mem::swap(&mut rb[s], &mut cb[s]);
            }
            let join = |bits: &[usize]| bits.iter().fold(0, |acc, &b| (acc << 1) | b);
            out[(join(&rb), join(&cb))] = rho[(r, c)];
        }
    }
    out
}

/// `log2` of the trace norm as the sum of singular values.
pub fn log_negativity_oracle(rho: &DMatrix<C64>, m: usize, a: &[usize]) -> f64 {
    let pt = partial_transpose_oracle(rho, m, a);
    pt.svd(false, false)
        .singular_values
        .iter()
        .sum::<f64>()
        .log2()
}

/// Haar-random pure state with independent Gaussian amplitudes.
pub fn random_amplitudes<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    let normal = rand_distr::StandardNormal;
    let mut v: Vec<C64> = (0..1usize << n)
        .map(|_| C64::new(rng.sample(normal), rng.sample(normal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

pub fn density_of(amps: &[C64]) -> ReducedDensityMatrix {
    ReducedDensityMatrix::from_pure(amps).expect("valid pure state")
}

pub fn ket(bits: &str) -> Vec<C64> {
    let n = bits.len();
    let idx = usize::from_str_radix(bits, 2).unwrap();
    let mut v = vec![ZERO; 1 << n];
    v[idx] = C64::new(1.0, 0.0);
    v
}

/// Normalized superposition of computational basis states.
pub fn superposition(terms: &[&str]) -> Vec<C64> {
    let mut v = vec![ZERO; 1 << terms[0].len()];
    let amp = 1.0 / (terms.len() as f64).sqrt();
    for t in terms {
        v[usize::from_str_radix(t, 2).unwrap()] += C64::new(amp, 0.0);
    }
    v
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hop distances from `source` in the undirected spacetime graph.
pub fn bfs_oracle(graph: &SpacetimeGraph, source: usize) -> Vec<Option<usize>> {
    let n = graph.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in graph.edges() {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut dist = vec![None; n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Exact minimum Steiner tree size for 2 to 4 terminals by enumerating tree
/// topologies: a path, one branch vertex, or two branch vertices joined by a
/// path with the terminals split in pairs.
pub fn steiner_by_topology(graph: &SpacetimeGraph, terminals: &[usize]) -> Option<usize> {
    let all: Vec<Vec<Option<usize>>> = terminals.iter().map(|&t| bfs_oracle(graph, t)).collect();
    let n = graph.n_vertices();
    match terminals.len() {
        1 => Some(0),
        2 => all[0][terminals[1]],
        3 => (0..n)
            .filter_map(|v| Some(all[0][v]? + all[1][v]? + all[2][v]?))
            .min(),
        4 => {
            let pairings = [([0, 1], [2, 3]), ([0, 2], [1, 3]), ([0, 3], [1, 2])];
            let mut best: Option<usize> = None;
            for (p, q) in pairings {
                for u in 0..n {
                    let (Some(a), Some(b)) = (all[p[0]][u], all[p[1]][u]) else {
                        continue;
                    };
                    let du = bfs_oracle(graph, u);
                    for v in 0..n {
                        let (Some(c), Some(d), Some(uv)) = (all[q[0]][v], all[q[1]][v], du[v])
                        else {
                            continue;
                        };
                        let cost = a + b + c + d + uv;
                        best = Some(best.map_or(cost, |x: usize| x.min(cost)));
                    }
                }
            }
            best
        }
        _ => panic!("2 to 4 terminals"),
    }
}

/// Minimum size of an edge subset connecting `terminals`, by enumerating
/// every subset. Only for graphs with at most ~20 edges.
pub fn steiner_brute_force(graph: &SpacetimeGraph, terminals: &[usize]) -> Option<usize> {
    let edges = graph.edges();
    let m = edges.len();
    assert!(m <= 22, "too many edges for exhaustive search");
    let n = graph.n_vertices();
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << m) {
        let size = mask.count_ones() as usize;
        if best.is_some_and(|b| size >= b) {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (k, e) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, terminals[0]);
        if terminals.iter().all(|&t| find(&mut parent, t) == root) {
            best = Some(size);
        }
    }
    best
}

/// Brickwork gates on `n` sites for `steps` steps, each kept with
/// probability `keep`, and measurements at rate `p`.
pub fn random_events<R: Rng>(
    n: usize,
    steps: usize,
    keep: f64,
    p: f64,
    rng: &mut R,
) -> (Vec<(usize, usize, usize)>, Vec<Vec<bool>>) {
    let mut gates = Vec::new();
    for u in 0..steps {
        let mut i = u % 2;
        while i + 1 < n {
            if rng.gen::<f64>() < keep {
                gates.push((u, i, i + 1));
            }
            i += 2;
        }
    }
    let measured = (0..steps)
        .map(|_| (0..n).map(|_| rng.gen::<f64>() < p).collect())
        .collect();
    (gates, measured)
}

pub fn count_kind(graph: &SpacetimeGraph, kind: EdgeKind) -> usize {
    graph.edges().iter().filter(|e| e.kind == kind).count()
}

/// Mean and standard error of a sample.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
