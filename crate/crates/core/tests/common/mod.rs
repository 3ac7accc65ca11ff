//! Shared fixtures and independent reference solvers for integration tests.
#![allow(dead_code)]

use cobra::{DataMatrix, Edge, WeightedGraph};
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_matrix<R: Rng>(rng: &mut R, p: usize, n: usize, scale: f64) -> DataMatrix {
    let values = Array2::from_shape_fn((p, n), |_| scale * rng.sample::<f64, _>(StandardNormal));
    DataMatrix::new(values).unwrap()
}

/// Random spanning tree plus extra edges with probability `extra`, weights in `[0.1, 1)`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, q: usize, extra: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for j in 1..q {
        let i = rng.random_range(0..j);
        seen.insert((i, j));
        edges.push(Edge { i, j, w: rng.random_range(0.1..1.0) });
    }
    for i in 0..q {
        for j in i + 1..q {
            if !seen.contains(&(i, j)) && rng.random_bool(extra) {
                edges.push(Edge { i, j, w: rng.random_range(0.1..1.0) });
            }
        }
    }
    WeightedGraph::new(q, edges).unwrap()
}

fn project(v: &mut [f64], radius: f64) {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > radius {
        let s = radius / norm;
        v.iter_mut().for_each(|a| *a *= s);
    }
}

/// Exact cyclic block-coordinate ascent on the dual of the column-fusion prox.
/// Objects are the columns of `z`. Returns the primal iterate.
pub fn prox_oracle(z: &Array2<f64>, graph: &WeightedGraph, gamma: f64, sweeps: usize) -> Array2<f64> {
    joint_oracle(z, &WeightedGraph::new(z.nrows(), []).unwrap(), graph, gamma, sweeps)
}

/// Exact cyclic block-coordinate ascent on the dual of the full biclustering
/// problem, `U = X - sum_l v_l (e_i - e_j)^T - sum_k (e_a - e_b) v_k^T`.
/// Each dual block has Hessian `2I`, so one projected half-gradient step is its exact maximizer.
pub fn joint_oracle(
    x: &Array2<f64>,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    gamma: f64,
    sweeps: usize,
) -> Array2<f64> {
    let (p, n) = x.dim();
    let mut u = x.clone();
    let mut vc = vec![vec![0.0; p]; col_graph.edge_count()];
    let mut vr = vec![vec![0.0; n]; row_graph.edge_count()];
    for _ in 0..sweeps {
        let mut change: f64 = 0.0;
        for (l, e) in col_graph.edges().iter().enumerate() {
            let old = vc[l].clone();
            for r in 0..p {
                vc[l][r] += 0.5 * (u[[r, e.i]] - u[[r, e.j]]);
            }
            project(&mut vc[l], gamma * e.w);
            for r in 0..p {
                let d = vc[l][r] - old[r];
                u[[r, e.i]] -= d;
                u[[r, e.j]] += d;
                change = change.max(d.abs());
            }
        }
        for (l, e) in row_graph.edges().iter().enumerate() {
            let old = vr[l].clone();
            for c in 0..n {
                vr[l][c] += 0.5 * (u[[e.i, c]] - u[[e.j, c]]);
            }
            project(&mut vr[l], gamma * e.w);
            for c in 0..n {
                let d = vr[l][c] - old[c];
                u[[e.i, c]] -= d;
                u[[e.j, c]] += d;
                change = change.max(d.abs());
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    u
}
