#![allow(dead_code)]

use hopenum::graph::Graph;
use hopenum::Query;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdos-Renyi style digraph with `n` vertices and edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// A small random graph and query derived from `seed`.
pub fn instance(seed: u64, max_vertices: usize, max_k: u32) -> (Graph, Query) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=max_vertices);
    let p = rng.gen_range(0.05..0.45);
    let g = random_graph(n, p, &mut rng);
    let s = rng.gen_range(0..n as u32);
    let mut t = rng.gen_range(0..n as u32 - 1);
    if t >= s {
        t += 1;
    }
    let k = rng.gen_range(2..=max_k);
    (g, Query::new(s, t, k).unwrap())
}
