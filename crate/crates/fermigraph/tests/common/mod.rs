#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fermigraph::linalg::Matrix;
use fermigraph::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus each remaining pair with probability `p`.
pub fn random_connected_graph(m: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut order: Vec<usize> = (1..=m).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..m {
        let parent = order[rng.random_range(0..k)];
        edges.push((parent.min(order[k]), parent.max(order[k])));
    }
    for i in 1..=m {
        for j in i + 1..=m {
            if !edges.contains(&(i, j)) && rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(m, &edges).unwrap()
}

/// Real symmetric h on `g`: h_ij = −w with w ∈ [0.1, 2] on edges, diagonal in [−2, 2].
pub fn random_hopping(g: &Graph, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let m = g.vertex_count();
    let mut h = Matrix::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = rng.random_range(-2.0..2.0);
    }
    for (i, j) in g.edges() {
        let w = rng.random_range(0.1..2.0);
        h[(i, j)] = -w;
        h[(j, i)] = -w;
    }
    h
}

/// Symmetric interaction with zero diagonal and entries in [lo, hi].
pub fn random_interaction(m: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    let mut w = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let x = rng.random_range(lo..hi);
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    w
}

pub fn random_potential(m: usize, amp: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-amp..amp)).collect()
}

/// Interior density with every entry in [margin, 1 − margin].
pub fn random_interior_density(m: usize, n: usize, margin: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let rho = fermigraph::convex::project_hypersimplex(&raw, n);
        if rho.iter().all(|&x| x >= margin && x <= 1.0 - margin) {
            return rho;
        }
    }
}
pub mod props;
