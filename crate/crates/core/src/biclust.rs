//! The Dykstra-like outer loop alternating row and column fusion proxes,
//! solution paths over `gamma`, and the coalescence point.

use ndarray::{Array2, ArrayView2, Zip};
use serde::Serialize;

use crate::error::{invalid, CobraError, Result};
use crate::matrix::{frobenius_dist, frobenius_norm, grand_mean, CentroidMatrix, DataMatrix, Partition};
use crate::joint::joint_dual_ascent;
use crate::prox::{default_fuse_tol, fusion_penalty, prox_objects, EdgeDuals, ProxSolution};
use crate::weights::{is_connected, WeightedGraph};

/// Tolerances and iteration caps for [`cobra_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Stop once `||U_m - Y_m^T||_F <= outer_tol * (1 + ||X||_F)`.
    pub outer_tol: f64,
    /// Absolute prox tolerance; defaults to a tenth of the absolute outer tolerance.
    pub inner_tol: Option<f64>,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Edge-difference threshold for fusion; defaults to [`default_fuse_tol`] of each prox anchor.
    pub fuse_tol: Option<f64>,
    /// Iterate past convergence and polish the final proxes so partitions are
    /// read off settled edge differences. Fits used only for their centroids
    /// can turn this off.
    pub settle_partitions: bool,
    /// Start the splitting from an accelerated dual ascent on the full
    /// problem, which already satisfies `U + P + Q^T = X`.
    pub presolve: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-6,
            inner_tol: None,
            max_outer: 500,
            max_inner: crate::prox::DEFAULT_MAX_ITER,
            fuse_tol: None,
            settle_partitions: true,
            presolve: true,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.outer_tol.is_finite() && self.outer_tol > 0.0) {
            return invalid("outer_tol must be positive");
        }
        if let Some(t) = self.inner_tol {
            if !(t.is_finite() && t > 0.0) {
                return invalid("inner_tol must be positive");
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return invalid("iteration caps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BiclustProblem<'a> {
    pub x: &'a DataMatrix,
    pub col_graph: &'a WeightedGraph,
    pub row_graph: &'a WeightedGraph,
    pub gamma: f64,
}

impl BiclustProblem<'_> {
    fn validate(&self) -> Result<()> {
        let (p, n) = self.x.shape();
        if self.col_graph.node_count() != n {
            return invalid(format!(
                "column graph has {} nodes, matrix has {n} columns",
                self.col_graph.node_count()
            ));
        }
        if self.row_graph.node_count() != p {
            return invalid(format!(
                "row graph has {} nodes, matrix has {p} rows",
                self.row_graph.node_count()
            ));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return invalid(format!("gamma must be finite and nonnegative, got {}", self.gamma));
        }
        Ok(())
    }
}

/// Iterates of the splitting.
///
/// `u`, `p` are `p x n`; `y`, `q` are stored transposed (`n x p`) as in the
/// column-clustering step. The invariant `U + P + Q^T = X` holds after every
/// iteration, which is what makes a state reusable as a warm start.
#[derive(Debug, Clone)]
pub struct DykstraState {
    pub u: Array2<f64>,
    pub y: Array2<f64>,
    pub p: Array2<f64>,
    pub q: Array2<f64>,
    pub row_duals: EdgeDuals,
    pub col_duals: EdgeDuals,
    pub gamma: f64,
    pub iterations: usize,
    pub gap: f64,
}

/// Clustering of one axis read off a prox solve.
#[derive(Debug, Clone)]
pub struct AxisFit {
    pub partition: Partition,
    pub duals: EdgeDuals,
    /// Edge difference vectors, one row per graph edge.
    pub differences: Array2<f64>,
    pub edges: Vec<(usize, usize)>,
    pub fuse_tol: f64,
    pub kkt_residual: f64,
}

impl AxisFit {
    fn from_solution(sol: ProxSolution, graph: &WeightedGraph, fuse_tol: f64) -> Self {
        let partition = crate::prox::extract_partition(&sol, graph, fuse_tol);
        Self {
            partition,
            duals: sol.duals,
            differences: sol.differences,
            edges: graph.edges().iter().map(|e| (e.i, e.j)).collect(),
            fuse_tol,
            kkt_residual: sol.kkt_residual,
        }
    }

    pub fn difference_norms(&self) -> Vec<f64> {
        crate::prox::row_norms(&self.differences)
    }
}

#[derive(Debug, Clone)]
pub struct BiclusterFit {
    pub u: CentroidMatrix,
    pub rows: AxisFit,
    pub cols: AxisFit,
    pub gamma: f64,
    pub gap: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Iterations of the joint dual ascent that seeded the splitting.
    pub presolve_iterations: usize,
    pub state: DykstraState,
}

impl BiclusterFit {
    pub fn row_partition(&self) -> &Partition {
        &self.rows.partition
    }

    pub fn col_partition(&self) -> &Partition {
        &self.cols.partition
    }

    pub fn bicluster_count(&self) -> usize {
        self.rows.partition.n_clusters() * self.cols.partition.n_clusters()
    }

    pub fn bicluster_partition(&self) -> Partition {
        crate::metrics::bicluster_flatten(&self.rows.partition, &self.cols.partition)
    }
}

/// One bicluster's block average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockMean {
    pub row_cluster: usize,
    pub col_cluster: usize,
    pub size: usize,
    pub mean: f64,
}

/// Block averages of `values` over row x column clusters, lexicographic in `(row, col)` label.
pub fn block_means(values: &ArrayView2<f64>, rows: &Partition, cols: &Partition) -> Vec<BlockMean> {
    let (r, c) = (rows.n_clusters(), cols.n_clusters());
    let mut sum = vec![0.0; r * c];
    let mut count = vec![0usize; r * c];
    for (i, &a) in rows.labels().iter().enumerate() {
        for (j, &b) in cols.labels().iter().enumerate() {
            sum[a * c + b] += values[[i, j]];
            count[a * c + b] += 1;
        }
    }
    (0..r * c)
        .map(|k| BlockMean {
            row_cluster: k / c,
            col_cluster: k % c,
            size: count[k],
            mean: sum[k] / count[k] as f64,
        })
        .collect()
}

/// `J(U) = Omega_W(U) + Omega_W~(U^T)`.
pub fn penalty_value(u: &ArrayView2<f64>, row_graph: &WeightedGraph, col_graph: &WeightedGraph) -> Result<f64> {
    let (p, n) = u.dim();
    if col_graph.node_count() != n || row_graph.node_count() != p {
        return Err(CobraError::ShapeMismatch {
            expected: (row_graph.node_count(), col_graph.node_count()),
            found: (p, n),
        });
    }
    Ok(fusion_penalty(u, col_graph) + fusion_penalty(&u.t(), row_graph))
}

pub fn biclust_objective(
    x: &ArrayView2<f64>,
    u: &ArrayView2<f64>,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    gamma: f64,
) -> Result<f64> {
    let fit = 0.5 * frobenius_dist(x, u).powi(2);
    Ok(fit + gamma * penalty_value(u, row_graph, col_graph)?)
}

/// Minimizes the biclustering objective by the Dykstra-like splitting.
///
/// Each outer step clusters the rows of `U + P`, then the columns of `Y + Q`.
/// Prox duals are carried across outer steps. The prox tolerance is halved
/// whenever the outer gap decreases by less than 1% over five iterations.
/// Partitions come from the final prox solves, re-solved from their duals to
/// below half the fusion threshold when the working tolerance is coarser.
pub fn cobra_fit(
    problem: &BiclustProblem<'_>,
    opts: &SolverOptions,
    warm: Option<&DykstraState>,
) -> Result<BiclusterFit> {
    problem.validate()?;
    opts.validate()?;
    let x = problem.x.values();
    let (p, n) = x.dim();
    let gamma = problem.gamma;
    let (rg, cg) = (problem.row_graph, problem.col_graph);
    let x_norm = frobenius_norm(&x.view());
    let abs_tol = opts.outer_tol * (1.0 + x_norm);
    let mut inner_tol = opts.inner_tol.unwrap_or(abs_tol / 10.0);
    let tol_floor = 1e-14 * (1.0 + x_norm);

    let warm = warm.filter(|w| {
        w.u.dim() == (p, n)
            && w.row_duals.edge_count() == rg.edge_count()
            && w.col_duals.edge_count() == cg.edge_count()
            && w.row_duals.dim() == n
            && w.col_duals.dim() == p
    });
    let (mut u, mut pm, mut qm, mut row_duals, mut col_duals) = match warm {
        Some(w) if w.gamma > 0.0 && gamma > 0.0 => {
            let s = gamma / w.gamma;
            let pm = &w.p * s;
            let qm = &w.q * s;
            let u = x - &pm - &qm.t();
            (u, pm, qm, w.row_duals.scaled(s), w.col_duals.scaled(s))
        }
        _ => (
            x.clone(),
            Array2::zeros((p, n)),
            Array2::zeros((n, p)),
            EdgeDuals::zeros(rg.edge_count(), n),
            EdgeDuals::zeros(cg.edge_count(), p),
        ),
    };

    let mut presolve_iterations = 0;
    if opts.presolve && gamma > 0.0 {
        let joint = joint_dual_ascent(
            &x.view(),
            rg,
            cg,
            gamma,
            inner_tol,
            opts.max_inner,
            Some((&row_duals, &col_duals)),
        )?;
        pm = row_contribution(rg, joint.row_duals.values(), p, n);
        qm = col_contribution(cg, joint.col_duals.values(), p, n).reversed_axes();
        u = joint.u;
        presolve_iterations = joint.iterations;
        row_duals = joint.row_duals;
        col_duals = joint.col_duals;
    }

    let mut y_t = Array2::zeros((p, n));
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut history: Vec<f64> = Vec::new();
    let mut row_anchor = Array2::zeros((p, n));
    let mut col_anchor = Array2::zeros((n, p));
    let mut row_sol = None;
    let mut col_sol = None;

    while iterations < opts.max_outer {
        iterations += 1;
        // rows of U + P
        Zip::from(&mut row_anchor).and(&u).and(&pm).for_each(|a, &b, &c| *a = b + c);
        let rs = prox_objects(&row_anchor.view(), rg, gamma, inner_tol, opts.max_inner, Some(&row_duals))?;
        y_t.assign(&rs.u);
        Zip::from(&mut pm).and(&row_anchor).and(&y_t).for_each(|a, &b, &c| *a = b - c);
        row_duals = rs.duals.clone();
        row_sol = Some(rs);

        // columns of Y + Q
        Zip::from(&mut col_anchor).and(&y_t.t()).and(&qm).for_each(|a, &b, &c| *a = b + c);
        let cs = prox_objects(&col_anchor.view(), cg, gamma, inner_tol, opts.max_inner, Some(&col_duals))?;
        u.assign(&cs.u.t());
        Zip::from(&mut qm).and(&col_anchor).and(&cs.u).for_each(|a, &b, &c| *a = b - c);
        col_duals = cs.duals.clone();
        col_sol = Some(cs);

        gap = frobenius_dist(&u.view(), &y_t.view());
        if !gap.is_finite() {
            return Err(CobraError::NonFiniteIterate("biclustering splitting"));
        }
        if gap <= abs_tol {
            converged = true;
            if gamma == 0.0 || !opts.settle_partitions {
                break;
            }
            // Fusion is read off single edge differences, which need the
            // iterates settled well below the fusion threshold.
            let row_fuse = opts.fuse_tol.unwrap_or_else(|| default_fuse_tol(&row_anchor.view()));
            let col_fuse = opts.fuse_tol.unwrap_or_else(|| default_fuse_tol(&col_anchor.view()));
            let settle = 0.1 * row_fuse.min(col_fuse);
            if gap <= settle {
                break;
            }
            inner_tol = inner_tol.min(0.1 * settle);
        }
        history.push(gap);
        if history.len() > 5 {
            let old = history[history.len() - 6];
            if gap > 0.99 * old && inner_tol > tol_floor {
                inner_tol = (inner_tol * 0.5).max(tol_floor);
                history.clear();
            }
        }
    }

    let mut row_sol = row_sol.expect("at least one iteration");
    let mut col_sol = col_sol.expect("at least one iteration");
    let row_fuse = opts.fuse_tol.unwrap_or_else(|| default_fuse_tol(&row_anchor.view()));
    let col_fuse = opts.fuse_tol.unwrap_or_else(|| default_fuse_tol(&col_anchor.view()));
    let polish_iter = opts.max_inner.max(crate::prox::DEFAULT_MAX_ITER);
    if opts.settle_partitions && gamma > 0.0 && inner_tol > 0.5 * row_fuse {
        row_sol = prox_objects(&row_anchor.view(), rg, gamma, 0.5 * row_fuse, polish_iter, Some(&row_sol.duals))?;
    }
    if opts.settle_partitions && gamma > 0.0 && inner_tol > 0.5 * col_fuse {
        col_sol = prox_objects(&col_anchor.view(), cg, gamma, 0.5 * col_fuse, polish_iter, Some(&col_sol.duals))?;
        u.assign(&col_sol.u.t());
        Zip::from(&mut qm).and(&col_anchor).and(&col_sol.u).for_each(|a, &b, &c| *a = b - c);
        col_duals = col_sol.duals.clone();
    }

    let objective = biclust_objective(&x.view(), &u.view(), rg, cg, gamma)?;
    let state = DykstraState {
        u: u.clone(),
        y: y_t.t().to_owned(),
        p: pm,
        q: qm,
        row_duals,
        col_duals,
        gamma,
        iterations,
        gap,
    };
    Ok(BiclusterFit {
        u: CentroidMatrix::new(u)?,
        rows: AxisFit::from_solution(row_sol, rg, row_fuse),
        cols: AxisFit::from_solution(col_sol, cg, col_fuse),
        gamma,
        gap,
        objective,
        converged,
        iterations,
        presolve_iterations,
        state,
    })
}

/// `sum_k (e_a - e_b) v_k^T` over row edges.
fn row_contribution(g: &WeightedGraph, duals: &Array2<f64>, p: usize, n: usize) -> Array2<f64> {
    let mut out = Array2::zeros((p, n));
    for (k, e) in g.edges().iter().enumerate() {
        out.row_mut(e.i).scaled_add(1.0, &duals.row(k));
        out.row_mut(e.j).scaled_add(-1.0, &duals.row(k));
    }
    out
}

/// `sum_l v_l (e_i - e_j)^T` over column edges.
fn col_contribution(g: &WeightedGraph, duals: &Array2<f64>, p: usize, n: usize) -> Array2<f64> {
    let mut out = Array2::zeros((p, n));
    for (l, e) in g.edges().iter().enumerate() {
        out.column_mut(e.i).scaled_add(1.0, &duals.row(l));
        out.column_mut(e.j).scaled_add(-1.0, &duals.row(l));
    }
    out
}

fn require_connected(row_graph: &WeightedGraph, col_graph: &WeightedGraph) -> Result<()> {
    for g in [row_graph, col_graph] {
        if !is_connected(g) {
            return Err(CobraError::Disconnected {
                components: g.components().n_clusters(),
            });
        }
    }
    Ok(())
}

/// Smallest tested `gamma` at which the fit collapses to the grand mean.
///
/// Multiplies `start` by `factor` until the fit coalesces, then bisects the
/// last bracket down to 1% relative width. Coalescence means
/// `||U - mean(X)||_F <= outer_tol * (1 + ||X||_F)`; fits are solved ten times
/// tighter than that.
pub fn gamma_max_search(
    x: &DataMatrix,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    opts: &SolverOptions,
    factor: f64,
    start: f64,
) -> Result<f64> {
    require_connected(row_graph, col_graph)?;
    if !(factor.is_finite() && factor > 1.0) {
        return invalid("factor must exceed 1");
    }
    if !(start.is_finite() && start > 0.0) {
        return invalid("start must be positive");
    }
    let mean = grand_mean(x);
    let threshold = opts.outer_tol * (1.0 + x.frobenius_norm());
    let tight = SolverOptions {
        outer_tol: opts.outer_tol / 10.0,
        settle_partitions: false,
        ..*opts
    };
    let mut warm: Option<DykstraState> = None;
    let coalesces = |gamma: f64, warm: &mut Option<DykstraState>| -> Result<bool> {
        let fit = cobra_fit(
            &BiclustProblem {
                x,
                col_graph,
                row_graph,
                gamma,
            },
            &tight,
            warm.as_ref(),
        )?;
        let d = frobenius_dist(&fit.u.view(), &mean.view());
        *warm = Some(fit.state);
        Ok(d <= threshold)
    };
    if coalesces(start, &mut warm)? {
        return Ok(start);
    }
    let (mut lo, mut hi) = (start, start * factor);
    let mut steps = 0;
    while !coalesces(hi, &mut warm)? {
        lo = hi;
        hi *= factor;
        steps += 1;
        if steps > 400 || !hi.is_finite() {
            return Err(CobraError::InvalidParameter(
                "no coalescence found; check the weights".into(),
            ));
        }
    }
    while (hi - lo) > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if coalesces(mid, &mut warm)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub const DEFAULT_CERTIFICATE_CAP: usize = 20_000_000;

/// Upper bound on the coalescence point from the least-squares dual certificate.
///
/// Solves `min ||A^T v - vec(X - mean)||` for the minimum-norm `v` by CGLS
/// started at zero, with `A` (stacked column and row edge differences) applied
/// matrix-free, and returns `max_l ||v_l|| / w_l` over all edges.
pub fn gamma_max_certificate(
    x: &DataMatrix,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    cap: usize,
) -> Result<f64> {
    require_connected(row_graph, col_graph)?;
    let (p, n) = x.shape();
    if col_graph.node_count() != n || row_graph.node_count() != p {
        return invalid("graph sizes do not match the matrix");
    }
    let size = col_graph.edge_count() * p + row_graph.edge_count() * n;
    if size > cap {
        return Err(CobraError::TooLarge { size, cap });
    }
    let mean = grand_mean(x);
    let b = x.values() - mean.values();
    let b_norm = frobenius_norm(&b.view());
    if b_norm == 0.0 {
        return Ok(0.0);
    }
    let op = EdgeOperator { p, n, row_graph, col_graph };

    let mut v = op.zero_dual();
    let mut r = b.clone();
    let mut s = op.adjoint(&r);
    let mut dir = s.clone();
    let mut gamma_cg = s.norm_sq();
    let stop = 1e-13 * gamma_cg.sqrt();
    let max_iter = 20 * (size + 10);
    for _ in 0..max_iter {
        if gamma_cg.sqrt() <= stop {
            break;
        }
        let qv = op.apply(&dir);
        let qq = frobenius_norm(&qv.view()).powi(2);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma_cg / qq;
        v.axpy(alpha, &dir);
        r.scaled_add(-alpha, &qv);
        s = op.adjoint(&r);
        let next = s.norm_sq();
        let beta = next / gamma_cg;
        gamma_cg = next;
        dir.scale_add(beta, &s);
    }

    let mut bound: f64 = 0.0;
    for (l, e) in col_graph.edges().iter().enumerate() {
        let nrm = v.col.row(l).iter().map(|a| a * a).sum::<f64>().sqrt();
        bound = bound.max(nrm / e.w);
    }
    for (l, e) in row_graph.edges().iter().enumerate() {
        let nrm = v.row.row(l).iter().map(|a| a * a).sum::<f64>().sqrt();
        bound = bound.max(nrm / e.w);
    }
    Ok(bound)
}

struct EdgeOperator<'a> {
    p: usize,
    n: usize,
    row_graph: &'a WeightedGraph,
    col_graph: &'a WeightedGraph,
}

/// A vector in edge space: one `p`-vector per column edge, one `n`-vector per row edge.
#[derive(Clone)]
struct EdgeVector {
    col: Array2<f64>,
    row: Array2<f64>,
}

impl EdgeVector {
    fn norm_sq(&self) -> f64 {
        self.col.iter().chain(self.row.iter()).map(|a| a * a).sum()
    }

    fn axpy(&mut self, alpha: f64, other: &EdgeVector) {
        self.col.scaled_add(alpha, &other.col);
        self.row.scaled_add(alpha, &other.row);
    }

    /// `self = other + beta * self`
    fn scale_add(&mut self, beta: f64, other: &EdgeVector) {
        self.col.mapv_inplace(|a| a * beta);
        self.col += &other.col;
        self.row.mapv_inplace(|a| a * beta);
        self.row += &other.row;
    }
}

impl EdgeOperator<'_> {
    fn zero_dual(&self) -> EdgeVector {
        EdgeVector {
            col: Array2::zeros((self.col_graph.edge_count(), self.p)),
            row: Array2::zeros((self.row_graph.edge_count(), self.n)),
        }
    }

    /// `A^T v` as a `p x n` matrix.
    fn apply(&self, v: &EdgeVector) -> Array2<f64> {
        let mut out = Array2::zeros((self.p, self.n));
        for (l, e) in self.col_graph.edges().iter().enumerate() {
            let vl = v.col.row(l);
            out.column_mut(e.i).scaled_add(1.0, &vl);
            out.column_mut(e.j).scaled_add(-1.0, &vl);
        }
        for (l, e) in self.row_graph.edges().iter().enumerate() {
            let vl = v.row.row(l);
            out.row_mut(e.i).scaled_add(1.0, &vl);
            out.row_mut(e.j).scaled_add(-1.0, &vl);
        }
        out
    }

    /// `A m`: column differences over column edges, row differences over row edges.
    fn adjoint(&self, m: &Array2<f64>) -> EdgeVector {
        let mut out = self.zero_dual();
        for (l, e) in self.col_graph.edges().iter().enumerate() {
            let d = &m.column(e.i) - &m.column(e.j);
            out.col.row_mut(l).assign(&d);
        }
        for (l, e) in self.row_graph.edges().iter().enumerate() {
            let d = &m.row(e.i) - &m.row(e.j);
            out.row.row_mut(l).assign(&d);
        }
        out
    }
}

/// One fit along a path, with the grid value it was warm-started from.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub fit: BiclusterFit,
    pub warm_from: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Path {
    pub points: Vec<PathPoint>,
}

impl Path {
    pub fn gammas(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.fit.gamma).collect()
    }

    pub fn bicluster_counts(&self) -> Vec<usize> {
        self.points.iter().map(|pt| pt.fit.bicluster_count()).collect()
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("gamma grid is empty");
    }
    if grid.iter().any(|g| !g.is_finite()) || grid[0] < 0.0 {
        return invalid("gamma grid must be finite and nonnegative");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("gamma grid must be strictly increasing");
    }
    Ok(())
}

/// Fits every `gamma` in `grid` in order, warm-starting each from the previous fit.
pub fn solution_path(
    x: &DataMatrix,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<Path> {
    validate_grid(grid)?;
    let mut points: Vec<PathPoint> = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let prev = points.last().map(|pt| &pt.fit);
        let fit = cobra_fit(
            &BiclustProblem {
                x,
                col_graph,
                row_graph,
                gamma,
            },
            opts,
            prev.map(|f| &f.state),
        )?;
        points.push(PathPoint {
            warm_from: prev.map(|f| f.gamma),
            fit,
        });
    }
    Ok(Path { points })
}

/// `0` followed by `count - 1` log-spaced values from `gmax / 1000` to `gmax`.
pub fn default_gamma_grid(gmax: f64, count: usize) -> Result<Vec<f64>> {
    if !(gmax.is_finite() && gmax > 0.0) {
        return invalid("gmax must be positive");
    }
    if count < 2 {
        return invalid("grid needs at least two points");
    }
    let m = count - 1;
    let mut grid = vec![0.0];
    if m == 1 {
        grid.push(gmax);
    } else {
        let (lo, hi) = ((gmax * 1e-3).ln(), gmax.ln());
        for k in 0..m {
            let t = k as f64 / (m - 1) as f64;
            grid.push((lo + t * (hi - lo)).exp());
        }
        *grid.last_mut().unwrap() = gmax;
    }
    Ok(grid)
}
