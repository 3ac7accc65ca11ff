//! End-to-end biclustering: weight graphs, coalescence point, hold-out
//! selection of `gamma`, and the final full-data fit.

use serde::{Deserialize, Serialize};

use crate::biclust::{
    cobra_fit, default_gamma_grid, gamma_max_certificate, gamma_max_search, BiclustProblem, BiclusterFit,
    SolverOptions, DEFAULT_CERTIFICATE_CAP,
};
use crate::error::{CobraError, Result};
use crate::matrix::{center_grand_mean, DataMatrix};
use crate::select::{sample_holdout, select_gamma, HoldoutSpec, MissingOptions, Selection};
use crate::weights::{
    bridge_components, default_target_sums, is_connected, knn_gaussian_weights, Axis, WeightParams, WeightedGraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub k_cols: usize,
    pub k_rows: usize,
    pub phi: f64,
    /// Column weight total; defaults to `1/sqrt(p)`.
    pub col_target: Option<f64>,
    /// Row weight total; defaults to `1/sqrt(n)`.
    pub row_target: Option<f64>,
    /// Join disconnected k-NN graphs instead of failing.
    pub bridge: bool,
    pub holdout_fraction: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub certificate_cap: usize,
    pub solver: SolverOptions,
    pub missing: MissingOptions,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            k_cols: 10,
            k_rows: 10,
            phi: 0.5,
            col_target: None,
            row_target: None,
            bridge: false,
            holdout_fraction: 0.1,
            grid_size: 50,
            seed: 0,
            certificate_cap: DEFAULT_CERTIFICATE_CAP,
            solver: SolverOptions::default(),
            missing: MissingOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graphs {
    pub rows: WeightedGraph,
    pub cols: WeightedGraph,
    /// Edges added by bridging, per axis.
    pub row_bridges: usize,
    pub col_bridges: usize,
}

/// `(X - mean) / ||X - mean||_F`, or the centered matrix when it is zero.
pub fn weight_input(x: &DataMatrix) -> Result<DataMatrix> {
    let (centered, _) = center_grand_mean(x);
    let norm = centered.frobenius_norm();
    if norm == 0.0 {
        return Ok(centered);
    }
    DataMatrix::new(centered.values() / norm)
}

fn axis_graph(x: &DataMatrix, axis: Axis, k: usize, phi: f64, target: f64, bridge: bool) -> Result<(WeightedGraph, usize)> {
    let q = axis.object_count(x);
    if q == 1 {
        return Ok((WeightedGraph::new(1, [])?, 0));
    }
    let params = WeightParams::new(k.min(q - 1), phi, target)?;
    let g = knn_gaussian_weights(x, axis, &params)?;
    if is_connected(&g) {
        return Ok((g, 0));
    }
    if !bridge {
        return Err(CobraError::Disconnected {
            components: g.components().n_clusters(),
        });
    }
    let joined = bridge_components(&g, x, axis)?;
    let added = joined.edge_count() - g.edge_count();
    Ok((joined, added))
}

/// k-NN Gaussian graphs computed on the centered, unit-norm version of `x`.
///
/// `k` is capped at one less than the number of objects on each axis.
pub fn build_graphs(x: &DataMatrix, params: &PipelineParams) -> Result<Graphs> {
    let input = weight_input(x)?;
    let (p, n) = x.shape();
    let (col_default, row_default) = default_target_sums(p, n);
    let (cols, col_bridges) = axis_graph(
        &input,
        Axis::Columns,
        params.k_cols,
        params.phi,
        params.col_target.unwrap_or(col_default),
        params.bridge,
    )?;
    let (rows, row_bridges) = axis_graph(
        &input,
        Axis::Rows,
        params.k_rows,
        params.phi,
        params.row_target.unwrap_or(row_default),
        params.bridge,
    )?;
    Ok(Graphs {
        rows,
        cols,
        row_bridges,
        col_bridges,
    })
}

/// Coalescence point from the dual certificate, or from the bracketing search
/// when the certificate would exceed `certificate_cap`.
pub fn gamma_max(x: &DataMatrix, graphs: &Graphs, params: &PipelineParams) -> Result<f64> {
    match gamma_max_certificate(x, &graphs.rows, &graphs.cols, params.certificate_cap) {
        Err(CobraError::TooLarge { .. }) => gamma_max_search(x, &graphs.rows, &graphs.cols, &params.solver, 2.0, 1e-3),
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub graphs: Graphs,
    pub gamma_max: f64,
    pub grid: Vec<f64>,
    pub holdout: HoldoutSpec,
    pub selection: Selection,
    pub fit: BiclusterFit,
}

/// Graphs, grid up to the coalescence point, hold-out selection, and a full-data fit at the selected `gamma`.
pub fn run_pipeline(x: &DataMatrix, params: &PipelineParams) -> Result<PipelineResult> {
    let graphs = build_graphs(x, params)?;
    select_and_fit(x, graphs, params)
}

/// Selection and final fit with caller-supplied graphs.
pub fn select_and_fit(x: &DataMatrix, graphs: Graphs, params: &PipelineParams) -> Result<PipelineResult> {
    let (p, n) = x.shape();
    let holdout = sample_holdout(p, n, params.holdout_fraction, params.seed)?;
    select_and_fit_with(x, graphs, params, holdout)
}

/// [`select_and_fit`] with a fixed hold-out set.
pub fn select_and_fit_with(
    x: &DataMatrix,
    graphs: Graphs,
    params: &PipelineParams,
    holdout: HoldoutSpec,
) -> Result<PipelineResult> {
    if holdout.theta.shape() != x.shape() {
        return Err(CobraError::ShapeMismatch {
            expected: x.shape(),
            found: holdout.theta.shape(),
        });
    }
    let gmax = gamma_max(x, &graphs, params)?;
    // a constant matrix coalesces at every gamma
    let grid = default_gamma_grid(if gmax > 0.0 { gmax } else { 1.0 }, params.grid_size)?;
    let selection = select_gamma(x, &holdout.theta, &graphs.rows, &graphs.cols, &grid, &params.missing)?;
    let fit = cobra_fit(
        &BiclustProblem {
            x,
            col_graph: &graphs.cols,
            row_graph: &graphs.rows,
            gamma: selection.gamma_star,
        },
        &params.solver,
        None,
    )?;
    Ok(PipelineResult {
        graphs,
        gamma_max: gmax,
        grid,
        holdout,
        selection,
        fit,
    })
}
