//! Proximal operator of the weighted l2 fusion penalty, i.e. one convex
//! clustering solve, by projected ascent on the Lagrangian dual.
//!
//! For an anchor `Z` whose columns are the objects being fused, the primal is
//!
//! ```text
//! min_U  1/2 ||Z - U||_F^2 + gamma * sum_l w_l ||U_i(l) - U_j(l)||_2
//! ```
//!
//! Each edge `l` carries a dual vector `lambda_l` in the ball of radius
//! `gamma * w_l`. For fixed duals the primal minimizer is
//! `U = Z - sum_l lambda_l (e_i - e_j)^T`, and the dual gradient with respect to
//! `lambda_l` is the edge difference `V_l = U_i - U_j`. The ascent uses step
//! `1 / (2 d_max)`, which bounds the inverse Lipschitz constant of that gradient
//! (largest Laplacian eigenvalue of the unweighted graph), with Nesterov
//! momentum and gradient-based restarts.

use ndarray::{Array2, ArrayView2};

use crate::error::{invalid, CobraError, Result};
use crate::matrix::{frobenius_norm, Partition};
use crate::weights::WeightedGraph;

pub const DEFAULT_MAX_ITER: usize = 10_000;

/// One prox evaluation: anchor `z` (columns are fused), graph over those columns, and `gamma`.
#[derive(Debug, Clone, Copy)]
pub struct FusionProxProblem<'a> {
    pub z: ArrayView2<'a, f64>,
    pub graph: &'a WeightedGraph,
    pub gamma: f64,
}

/// Per-edge dual vectors, one row per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDuals {
    values: Array2<f64>,
}

impl EdgeDuals {
    pub fn zeros(edge_count: usize, dim: usize) -> Self {
        Self {
            values: Array2::zeros((edge_count, dim)),
        }
    }

    pub fn from_array(values: Array2<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn edge_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn norms(&self) -> Vec<f64> {
        row_norms(&self.values)
    }

    /// Largest violation of `||lambda_l|| <= gamma * w_l` (zero when feasible).
    pub fn max_violation(&self, graph: &WeightedGraph, gamma: f64) -> f64 {
        self.norms()
            .iter()
            .zip(graph.edges())
            .map(|(n, e)| (n - gamma * e.w).max(0.0))
            .fold(0.0, f64::max)
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        Self {
            values: &self.values * factor,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProxSolution {
    /// Smoothed matrix, same orientation as the anchor.
    pub u: Array2<f64>,
    pub duals: EdgeDuals,
    /// `V_l = U_i - U_j`, one row per edge.
    pub differences: Array2<f64>,
    pub kkt_residual: f64,
    /// Primal minus dual objective; bounds the suboptimality of `u`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ProxSolution {
    pub fn difference_norms(&self) -> Vec<f64> {
        row_norms(&self.differences)
    }
}

pub(crate) fn row_norms(a: &Array2<f64>) -> Vec<f64> {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

/// `1/2 ||Z - U||^2 + gamma * Omega_W(U)` with objects as columns.
pub fn prox_objective(z: &ArrayView2<f64>, u: &ArrayView2<f64>, graph: &WeightedGraph, gamma: f64) -> f64 {
    let fit: f64 = z.iter().zip(u.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * 0.5;
    fit + gamma * fusion_penalty(u, graph)
}

/// `sum_l w_l ||U_i - U_j||_2` over the columns of `u`.
pub fn fusion_penalty(u: &ArrayView2<f64>, graph: &WeightedGraph) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let a = u.column(e.i);
            let b = u.column(e.j);
            e.w * a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        })
        .sum()
}

/// Scale-aware threshold below which an edge difference counts as zero.
pub fn default_fuse_tol(z: &ArrayView2<f64>) -> f64 {
    let count = z.len().max(1) as f64;
    1e-6 * (1.0 + frobenius_norm(z) / count.sqrt())
}

/// Evaluates `prox_{gamma Omega_W}(z)` from a cold start.
pub fn prox_fusion(problem: &FusionProxProblem<'_>, tol: f64, max_iter: usize) -> Result<ProxSolution> {
    prox_fusion_warm(problem, tol, max_iter, None)
}

/// Evaluates the prox, starting the dual ascent from `warm` when given.
///
/// On reaching `max_iter` the best iterate seen is returned with `converged = false`.
pub fn prox_fusion_warm(
    problem: &FusionProxProblem<'_>,
    tol: f64,
    max_iter: usize,
    warm: Option<&EdgeDuals>,
) -> Result<ProxSolution> {
    if problem.graph.node_count() != problem.z.ncols() {
        return invalid(format!(
            "graph has {} nodes but the anchor has {} columns",
            problem.graph.node_count(),
            problem.z.ncols()
        ));
    }
    let z_objects = problem.z.t().to_owned();
    let mut sol = prox_objects(
        &z_objects.view(),
        problem.graph,
        problem.gamma,
        tol,
        max_iter,
        warm,
    )?;
    sol.u = sol.u.t().to_owned();
    Ok(sol)
}

/// Connected components of the edges whose difference norm is at most `fuse_tol`.
pub fn extract_partition(sol: &ProxSolution, graph: &WeightedGraph, fuse_tol: f64) -> Partition {
    let norms = sol.difference_norms();
    graph.components_where(|l, _| norms[l] <= fuse_tol)
}

/// Prox kernel with objects stored as rows of `z` (`q x d`); the returned `u` is also `q x d`.
pub(crate) fn prox_objects(
    z: &ArrayView2<f64>,
    graph: &WeightedGraph,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&EdgeDuals>,
) -> Result<ProxSolution> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return invalid(format!("gamma must be finite and nonnegative, got {gamma}"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let (q, d) = z.dim();
    if graph.node_count() != q {
        return invalid(format!(
            "graph has {} nodes but there are {q} objects",
            graph.node_count()
        ));
    }
    let m = graph.edge_count();
    if let Some(w) = warm {
        if w.edge_count() != m || w.dim() != d {
            return invalid("warm-start duals do not match the problem dimensions");
        }
    }
    let z = z.as_standard_layout().into_owned();
    let zs = z.as_slice().expect("standard layout");
    let ends: Vec<(usize, usize)> = graph.edges().iter().map(|e| (e.i, e.j)).collect();
    let radii: Vec<f64> = graph.edges().iter().map(|e| gamma * e.w).collect();

    if gamma == 0.0 || m == 0 {
        let u = z.clone();
        let mut diff = vec![0.0; m * d];
        edge_differences(u.as_slice().unwrap(), &ends, d, &mut diff);
        return Ok(ProxSolution {
            u,
            duals: EdgeDuals::zeros(m, d),
            differences: Array2::from_shape_vec((m, d), diff).unwrap(),
            kkt_residual: 0.0,
            duality_gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let step = 1.0 / (2.0 * graph.max_degree() as f64);

    let mut lam = match warm {
        Some(w) => w.values.as_standard_layout().into_owned().into_raw_vec_and_offset().0,
        None => vec![0.0; m * d],
    };
    project_balls(&mut lam, &radii, d);

    let mut u = vec![0.0; q * d];
    let mut v = vec![0.0; m * d];
    primal_from_duals(zs, &lam, &ends, d, &mut u);
    edge_differences(&u, &ends, d, &mut v);

    let mut best = Best::default();
    let res = complementarity(&lam, &v, &radii, d, tol);
    best.offer(res, 0, &lam);

    // momentum point and its (affine) primal image
    let mut y = lam.clone();
    let mut vy = v.clone();
    let mut lam_new = vec![0.0; m * d];
    let mut u_new = vec![0.0; q * d];
    let mut v_new = vec![0.0; m * d];
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = res <= tol;

    while !converged && iterations < max_iter {
        iterations += 1;
        for k in 0..m * d {
            lam_new[k] = y[k] + step * vy[k];
        }
        project_balls(&mut lam_new, &radii, d);
        primal_from_duals(zs, &lam_new, &ends, d, &mut u_new);
        edge_differences(&u_new, &ends, d, &mut v_new);
        if !u_new.iter().all(|x| x.is_finite()) {
            return Err(CobraError::NonFiniteIterate("prox dual ascent"));
        }

        let res = complementarity(&lam_new, &v_new, &radii, d, tol);
        best.offer(res, iterations, &lam_new);
        if res <= tol {
            converged = true;
        }

        let mut restart_dot = 0.0;
        for k in 0..m * d {
            restart_dot += (y[k] - lam_new[k]) * (lam_new[k] - lam[k]);
        }
        if restart_dot > 0.0 {
            t = 1.0;
            y.copy_from_slice(&lam_new);
            vy.copy_from_slice(&v_new);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for k in 0..m * d {
                y[k] = lam_new[k] + beta * (lam_new[k] - lam[k]);
                vy[k] = v_new[k] + beta * (v_new[k] - v[k]);
            }
            t = t_next;
        }
        std::mem::swap(&mut lam, &mut lam_new);
        std::mem::swap(&mut u, &mut u_new);
        std::mem::swap(&mut v, &mut v_new);
    }

    if !converged {
        lam = best.lam;
    }
    primal_from_duals(zs, &lam, &ends, d, &mut u);
    edge_differences(&u, &ends, d, &mut v);
    let stationarity = stationarity_residual(zs, &u, &lam, &ends, d);
    let kkt_residual = stationarity + complementarity(&lam, &v, &radii, d, tol);
    let mut gap = 0.0;
    for l in 0..m {
        let (vl, ll) = (&v[l * d..(l + 1) * d], &lam[l * d..(l + 1) * d]);
        let nv = vl.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = vl.iter().zip(ll).map(|(a, b)| a * b).sum();
        gap += radii[l] * nv - dot;
    }
    Ok(ProxSolution {
        u: Array2::from_shape_vec((q, d), u).unwrap(),
        duals: EdgeDuals::from_array(Array2::from_shape_vec((m, d), lam).unwrap()),
        differences: Array2::from_shape_vec((m, d), v).unwrap(),
        kkt_residual,
        duality_gap: gap.max(0.0),
        iterations,
        converged,
    })
}

struct Best {
    residual: f64,
    lam: Vec<f64>,
}

impl Default for Best {
    fn default() -> Self {
        Self {
            residual: f64::INFINITY,
            lam: Vec::new(),
        }
    }
}

impl Best {
    fn offer(&mut self, residual: f64, _iteration: usize, lam: &[f64]) {
        if residual < self.residual {
            self.residual = residual;
            self.lam.clear();
            self.lam.extend_from_slice(lam);
        }
    }
}

fn project_balls(lam: &mut [f64], radii: &[f64], d: usize) {
    for (l, chunk) in lam.chunks_exact_mut(d).enumerate() {
        let n2: f64 = chunk.iter().map(|x| x * x).sum();
        let r = radii[l];
        if n2 > r * r {
            let s = if n2 > 0.0 { r / n2.sqrt() } else { 0.0 };
            chunk.iter_mut().for_each(|x| *x *= s);
        }
    }
}

fn primal_from_duals(z: &[f64], lam: &[f64], ends: &[(usize, usize)], d: usize, u: &mut [f64]) {
    u.copy_from_slice(z);
    for (l, &(i, j)) in ends.iter().enumerate() {
        let ll = &lam[l * d..(l + 1) * d];
        for k in 0..d {
            u[i * d + k] -= ll[k];
            u[j * d + k] += ll[k];
        }
    }
}

fn edge_differences(u: &[f64], ends: &[(usize, usize)], d: usize, v: &mut [f64]) {
    for (l, &(i, j)) in ends.iter().enumerate() {
        let (ui, uj) = (&u[i * d..(i + 1) * d], &u[j * d..(j + 1) * d]);
        for (k, out) in v[l * d..(l + 1) * d].iter_mut().enumerate() {
            *out = ui[k] - uj[k];
        }
    }
}

/// Total complementary-slackness violation of `(lambda, V)`.
fn complementarity(lam: &[f64], v: &[f64], radii: &[f64], d: usize, tol: f64) -> f64 {
    let mut total = 0.0;
    for (l, &r) in radii.iter().enumerate() {
        let (vl, ll) = (&v[l * d..(l + 1) * d], &lam[l * d..(l + 1) * d]);
        let nv = vl.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > tol {
            let s = r / nv;
            total += vl
                .iter()
                .zip(ll)
                .map(|(a, b)| (b - s * a) * (b - s * a))
                .sum::<f64>()
                .sqrt();
        } else {
            let nl = ll.iter().map(|x| x * x).sum::<f64>().sqrt();
            total += (nl - r).max(0.0);
        }
    }
    total
}

fn stationarity_residual(z: &[f64], u: &[f64], lam: &[f64], ends: &[(usize, usize)], d: usize) -> f64 {
    let mut r: Vec<f64> = z.iter().zip(u).map(|(a, b)| a - b).collect();
    for (l, &(i, j)) in ends.iter().enumerate() {
        for k in 0..d {
            r[i * d + k] -= lam[l * d + k];
            r[j * d + k] += lam[l * d + k];
        }
    }
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}
