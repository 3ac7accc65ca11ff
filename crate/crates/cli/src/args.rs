use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cobra::biclust::SolverOptions;
use cobra::pipeline::PipelineParams;
use cobra::select::MissingOptions;

#[derive(Debug, Parser)]
#[command(name = "cobra", version, about = "Convex biclustering of numeric matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a checkerboard or five-block test matrix with its truth.
    Simulate(SimulateArgs),
    /// Fit at one regularization level.
    Fit(FitArgs),
    /// Fit along an increasing grid of regularization levels.
    Path(PathArgs),
    /// Choose the regularization level by hold-out validation, then fit.
    Select(SelectArgs),
    /// Thresholded or adaptive refinement of a selected fit.
    Refine(RefineArgs),
    /// Compare two partitions.
    Evaluate(EvaluateArgs),
    /// Render a fit as a cluster-ordered SVG heatmap.
    Heatmap(HeatmapArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Checkerboard,
    Nonckb,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "checkerboard")]
    pub design: Design,
    #[arg(long, default_value_t = 100)]
    pub rows: usize,
    #[arg(long, default_value_t = 100)]
    pub cols: usize,
    #[arg(long, default_value_t = 2)]
    pub row_groups: usize,
    #[arg(long, default_value_t = 8)]
    pub col_groups: usize,
    /// Noise standard deviation of the checkerboard design.
    #[arg(long, default_value_t = 1.5)]
    pub sigma: f64,
    /// Noise standard deviation of the five-block design; defaults to a variance of 0.1.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Five-block row band heights.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [10, 10])]
    pub row_blocks: Vec<usize>,
    /// Five-block column band widths.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [8, 8, 8])]
    pub col_blocks: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of matrices; replicate `k` uses seed `seed + k`.
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Output prefix: writes `<out>.csv` and `<out>.truth.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeightArgs {
    /// Nearest neighbours on both axes.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub k_cols: Option<usize>,
    #[arg(long)]
    pub k_rows: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub phi: f64,
    /// Column weight total; defaults to 1/sqrt(rows).
    #[arg(long)]
    pub col_target: Option<f64>,
    /// Row weight total; defaults to 1/sqrt(cols).
    #[arg(long)]
    pub row_target: Option<f64>,
    /// Join disconnected neighbour graphs with shortest cross-component edges.
    #[arg(long)]
    pub bridge: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Relative outer tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub max_outer: usize,
    #[arg(long, default_value_t = cobra::prox::DEFAULT_MAX_ITER)]
    pub max_inner: usize,
    #[arg(long)]
    pub fuse_tol: Option<f64>,
    /// Skip the joint dual warm start.
    #[arg(long)]
    pub no_presolve: bool,
}

impl SolverArgs {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            outer_tol: self.tol,
            inner_tol: self.inner_tol,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            fuse_tol: self.fuse_tol,
            presolve: !self.no_presolve,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelectionArgs {
    /// Fraction of cells held out.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    #[arg(long, default_value_t = 50)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub mm_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_mm: usize,
}

pub fn pipeline_params(weights: &WeightArgs, solver: &SolverArgs, selection: Option<&SelectionArgs>) -> PipelineParams {
    let base = PipelineParams::default();
    let solver_opts = solver.options();
    let mut params = PipelineParams {
        k_cols: weights.k_cols.unwrap_or(weights.k),
        k_rows: weights.k_rows.unwrap_or(weights.k),
        phi: weights.phi,
        col_target: weights.col_target,
        row_target: weights.row_target,
        bridge: weights.bridge,
        solver: solver_opts,
        missing: MissingOptions {
            solver: SolverOptions {
                settle_partitions: false,
                ..solver_opts
            },
            ..base.missing
        },
        ..base
    };
    if let Some(s) = selection {
        params.holdout_fraction = s.fraction;
        params.grid_size = s.grid_size;
        params.seed = s.seed;
        params.missing.mm_tol = s.mm_tol;
        params.missing.max_mm = s.max_mm;
    }
    params
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, conflicts_with = "gamma_fraction", required_unless_present = "gamma_fraction")]
    pub gamma: Option<f64>,
    /// Regularization as a fraction of the coalescence point.
    #[arg(long)]
    pub gamma_fraction: Option<f64>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Add N(0, sigma^2) noise before fitting.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of fits; replicate `k` perturbs with seed `seed + k`.
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Fit JSON path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the centroid matrix as CSV.
    #[arg(long)]
    pub u_out: Option<PathBuf>,
    /// Also write `<prefix>.rows.csv` and `<prefix>.cols.csv` assignments.
    #[arg(long)]
    pub assignments_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Explicit increasing grid; defaults to a log grid up to the coalescence point.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20)]
    pub grid_size: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Hold out exactly these cells instead of sampling.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Selection JSON path; the curve and mask go next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineMethod {
    Threshold,
    Adaptive,
}

#[derive(Debug, Args, Serialize)]
pub struct RefineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: RefineMethod,
    /// Threshold as a fraction of the difference-norm standard deviation.
    #[arg(long, default_value_t = cobra::refine::DEFAULT_THRESHOLD_FRACTION)]
    pub threshold_fraction: f64,
    /// Fit at this level instead of selecting one (thresholding only).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalAxis {
    Rows,
    Cols,
    Biclusters,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Assignment CSV, fit JSON or truth JSON.
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Partition read from JSON inputs.
    #[arg(long, value_enum, default_value = "biclusters")]
    pub axis: EvalAxis,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 600.0)]
    pub size: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
