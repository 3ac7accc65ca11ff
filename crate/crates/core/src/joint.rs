//! Accelerated projected dual ascent on the full biclustering problem.
//!
//! The dual variables are one vector per column edge (length `p`) and per row
//! edge (length `n`), each confined to a ball of radius `gamma * w`. The primal
//! point is `U = X - A^T v`, so stationarity holds exactly and the iteration
//! stops on the complementary-slackness residual, as in the prox kernel.

use ndarray::{Array2, ArrayView2};

use crate::error::{CobraError, Result};
use crate::prox::EdgeDuals;
use crate::weights::WeightedGraph;

pub(crate) struct JointSolution {
    pub u: Array2<f64>,
    pub row_duals: EdgeDuals,
    pub col_duals: EdgeDuals,
    pub iterations: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    pub residual: f64,
}

struct Layout {
    p: usize,
    n: usize,
    col_ends: Vec<(usize, usize)>,
    row_ends: Vec<(usize, usize)>,
    radii: Vec<f64>,
}

impl Layout {
    fn col_len(&self) -> usize {
        self.col_ends.len() * self.p
    }

    fn primal(&self, x: &[f64], lam: &[f64], u: &mut [f64]) {
        let (p, n) = (self.p, self.n);
        u.copy_from_slice(x);
        for (l, &(i, j)) in self.col_ends.iter().enumerate() {
            let v = &lam[l * p..(l + 1) * p];
            for r in 0..p {
                u[r * n + i] -= v[r];
                u[r * n + j] += v[r];
            }
        }
        let off = self.col_len();
        for (k, &(a, b)) in self.row_ends.iter().enumerate() {
            let v = &lam[off + k * n..off + (k + 1) * n];
            for c in 0..n {
                u[a * n + c] -= v[c];
                u[b * n + c] += v[c];
            }
        }
    }

    fn differences(&self, u: &[f64], g: &mut [f64]) {
        let (p, n) = (self.p, self.n);
        for (l, &(i, j)) in self.col_ends.iter().enumerate() {
            for r in 0..p {
                g[l * p + r] = u[r * n + i] - u[r * n + j];
            }
        }
        let off = self.col_len();
        for (k, &(a, b)) in self.row_ends.iter().enumerate() {
            for c in 0..n {
                g[off + k * n + c] = u[a * n + c] - u[b * n + c];
            }
        }
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = (0..self.col_ends.len()).map(|l| (l * self.p, self.p));
        let off = self.col_len();
        let rows = (0..self.row_ends.len()).map(move |k| (off + k * self.n, self.n));
        cols.chain(rows)
    }

    fn project(&self, lam: &mut [f64]) {
        for ((start, len), &r) in self.blocks().zip(&self.radii) {
            let chunk = &mut lam[start..start + len];
            let n2: f64 = chunk.iter().map(|x| x * x).sum();
            if n2 > r * r {
                let s = if n2 > 0.0 { r / n2.sqrt() } else { 0.0 };
                chunk.iter_mut().for_each(|x| *x *= s);
            }
        }
    }

    fn complementarity(&self, lam: &[f64], g: &[f64], tol: f64) -> f64 {
        let mut total = 0.0;
        for ((start, len), &r) in self.blocks().zip(&self.radii) {
            let (vl, ll) = (&g[start..start + len], &lam[start..start + len]);
            let nv = vl.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nv > tol {
                let s = r / nv;
                total += vl.iter().zip(ll).map(|(a, b)| (b - s * a).powi(2)).sum::<f64>().sqrt();
            } else {
                let nl = ll.iter().map(|a| a * a).sum::<f64>().sqrt();
                total += (nl - r).max(0.0);
            }
        }
        total
    }
}

/// Runs until the complementarity residual is at most `tol` or `max_iter` iterations pass.
pub(crate) fn joint_dual_ascent(
    x: &ArrayView2<f64>,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<(&EdgeDuals, &EdgeDuals)>,
) -> Result<JointSolution> {
    let (p, n) = x.dim();
    let layout = Layout {
        p,
        n,
        col_ends: col_graph.edges().iter().map(|e| (e.i, e.j)).collect(),
        row_ends: row_graph.edges().iter().map(|e| (e.i, e.j)).collect(),
        radii: col_graph
            .edges()
            .iter()
            .chain(row_graph.edges())
            .map(|e| gamma * e.w)
            .collect(),
    };
    let size = layout.col_len() + layout.row_ends.len() * n;
    let xs = x.as_standard_layout().into_owned().into_raw_vec_and_offset().0;

    let mut lam = vec![0.0; size];
    if let Some((rows, cols)) = warm {
        let off = layout.col_len();
        lam[..off].copy_from_slice(cols.values().as_standard_layout().as_slice().unwrap());
        lam[off..].copy_from_slice(rows.values().as_standard_layout().as_slice().unwrap());
    }
    layout.project(&mut lam);

    let degree = (col_graph.max_degree() + row_graph.max_degree()).max(1);
    let step = 1.0 / (2.0 * degree as f64);
    let mut u = vec![0.0; p * n];
    let mut g = vec![0.0; size];
    layout.primal(&xs, &lam, &mut u);
    layout.differences(&u, &mut g);
    let mut residual = layout.complementarity(&lam, &g, tol);

    let mut y = lam.clone();
    let mut gy = g.clone();
    let mut lam_new = vec![0.0; size];
    let mut u_new = vec![0.0; p * n];
    let mut g_new = vec![0.0; size];
    let mut t = 1.0f64;
    let mut iterations = 0;

    while residual > tol && iterations < max_iter && size > 0 {
        iterations += 1;
        for k in 0..size {
            lam_new[k] = y[k] + step * gy[k];
        }
        layout.project(&mut lam_new);
        layout.primal(&xs, &lam_new, &mut u_new);
        layout.differences(&u_new, &mut g_new);
        if !u_new.iter().all(|a| a.is_finite()) {
            return Err(CobraError::NonFiniteIterate("joint dual ascent"));
        }
        residual = layout.complementarity(&lam_new, &g_new, tol);

        let restart: f64 = (0..size).map(|k| (y[k] - lam_new[k]) * (lam_new[k] - lam[k])).sum();
        if restart > 0.0 {
            t = 1.0;
            y.copy_from_slice(&lam_new);
            gy.copy_from_slice(&g_new);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for k in 0..size {
                y[k] = lam_new[k] + beta * (lam_new[k] - lam[k]);
                gy[k] = g_new[k] + beta * (g_new[k] - g[k]);
            }
            t = t_next;
        }
        std::mem::swap(&mut lam, &mut lam_new);
        std::mem::swap(&mut u, &mut u_new);
        std::mem::swap(&mut g, &mut g_new);
    }

    let off = layout.col_len();
    let col_duals = Array2::from_shape_vec((layout.col_ends.len(), p), lam[..off].to_vec()).unwrap();
    let row_duals = Array2::from_shape_vec((layout.row_ends.len(), n), lam[off..].to_vec()).unwrap();
    Ok(JointSolution {
        u: Array2::from_shape_vec((p, n), u).unwrap(),
        row_duals: EdgeDuals::from_array(row_duals),
        col_duals: EdgeDuals::from_array(col_duals),
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_columns_closed_form() {
        let x = array![[0.0, 2.0]];
        let rg = WeightedGraph::new(1, []).unwrap();
        let cg = WeightedGraph::complete(2, 0.5).unwrap();
        let sol = joint_dual_ascent(&x.view(), &rg, &cg, 1.0, 1e-12, 10_000, None).unwrap();
        assert!((sol.u[[0, 0]] - 0.5).abs() < 1e-10);
        assert!((sol.u[[0, 1]] - 1.5).abs() < 1e-10);
        assert!(sol.residual <= 1e-12);
    }
}
