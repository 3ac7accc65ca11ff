use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use cobra::biclust::{cobra_fit, default_gamma_grid, solution_path, BiclustProblem, BiclusterFit};
use cobra::heatmap::{render_svg, HeatmapOptions};
use cobra::io::{
    read_assignments, read_mask, read_matrix_csv, write_assignments, write_mask, write_matrix_csv, FitReport,
    WeightsMeta, SCHEMA,
};
use cobra::metrics::{bicluster_flatten, compare, Comparison};
use cobra::pipeline::{build_graphs, gamma_max, run_pipeline, select_and_fit_with, Graphs, PipelineParams};
use cobra::refine::{adaptive_cobra, thresholded_assign};
use cobra::select::{sample_holdout, HoldoutSpec, ValidationRecord};
use cobra::simulate::{generate_checkerboard, generate_nonckb, perturb, default_nonckb_sd, CheckerboardSpec, NonckbDims};
use cobra::{DataMatrix, Partition};

use crate::args::*;
use crate::manifest::{manifest_path, Clock, RunManifest};
use crate::output::{replicate_path, stem_of, with_suffix, Staged};

pub struct Outcome {
    pub converged: bool,
}

/// What a command produced before anything touches the file system.
struct Run {
    staged: Staged,
    converged: bool,
    inputs: Vec<PathBuf>,
    parameters: serde_json::Value,
    /// The manifest is written next to this path.
    primary: PathBuf,
}

pub fn dispatch(cmd: Command, argv: Vec<String>) -> Result<Outcome> {
    let clock = Clock::start();
    let (name, run) = match cmd {
        Command::Simulate(a) => ("simulate", simulate(&a)?),
        Command::Fit(a) => ("fit", fit(&a)?),
        Command::Path(a) => ("path", path(&a)?),
        Command::Select(a) => ("select", select(&a)?),
        Command::Refine(a) => ("refine", refine(&a)?),
        Command::Evaluate(a) => ("evaluate", evaluate(&a)?),
        Command::Heatmap(a) => ("heatmap", heatmap(&a)?),
        Command::Replay(_) => unreachable!("replay is handled before dispatch"),
    };
    let outputs = run.staged.paths();
    run.staged.commit()?;
    let manifest = RunManifest {
        schema: SCHEMA.to_owned(),
        command: name.to_owned(),
        argv,
        working_dir: std::env::current_dir()?,
        parameters: run.parameters,
        inputs: run.inputs,
        outputs,
        version: env!("CARGO_PKG_VERSION").to_owned(),
        timing: clock.timing(),
    };
    manifest.write(&manifest_path(&run.primary))?;
    Ok(Outcome { converged: run.converged })
}

pub fn replay(args: &ReplayArgs) -> Result<Outcome> {
    let manifest = RunManifest::read(&args.manifest)?;
    std::env::set_current_dir(&manifest.working_dir)
        .with_context(|| format!("entering {}", manifest.working_dir.display()))?;
    let cli = Cli::try_parse_from(std::iter::once("cobra".to_owned()).chain(manifest.argv.iter().cloned()))
        .context("manifest arguments no longer parse")?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("a manifest cannot replay another replay");
    }
    dispatch(cli.command, manifest.argv)
}

fn read_matrix(path: &Path) -> Result<DataMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let m = read_matrix_csv(file).with_context(|| format!("reading {}", path.display()))?;
    Ok(m.matrix)
}

fn params_json<T: Serialize>(args: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(args)?)
}

fn report_for(x: &DataMatrix, fit: &BiclusterFit, params: &PipelineParams, graphs: &Graphs) -> FitReport {
    let mut report = FitReport::new(x, fit, &params.solver);
    report.weights = Some(WeightsMeta::from_pipeline(x, params, graphs));
    report
}

fn graphs_for(x: &DataMatrix, params: &PipelineParams) -> Result<Graphs> {
    match build_graphs(x, params) {
        Err(e @ cobra::CobraError::Disconnected { .. }) => {
            Err(anyhow::Error::new(e).context("neighbour graph is disconnected; raise --k or pass --bridge"))
        }
        other => Ok(other?),
    }
}

fn fit_at(x: &DataMatrix, graphs: &Graphs, gamma: f64, params: &PipelineParams) -> Result<BiclusterFit> {
    let problem = BiclustProblem {
        x,
        col_graph: &graphs.cols,
        row_graph: &graphs.rows,
        gamma,
    };
    Ok(cobra_fit(&problem, &params.solver, None)?)
}

#[derive(Serialize)]
struct Truth {
    schema: &'static str,
    design: Design,
    seed: u64,
    row_labels: Vec<usize>,
    col_labels: Vec<usize>,
    /// Row-major cell labels, present when the truth is not a full checkerboard.
    #[serde(skip_serializing_if = "Option::is_none")]
    cell_labels: Option<Vec<usize>>,
    /// Block means indexed by (row label, column label), 1-based labels in order.
    means: Vec<Vec<f64>>,
    spec: serde_json::Value,
}

fn label_means(x: &DataMatrix, rows: &Partition, cols: &Partition) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; cols.n_clusters()]; rows.n_clusters()];
    for b in cobra::biclust::block_means(&x.view(), rows, cols) {
        table[b.row_cluster][b.col_cluster] = b.mean;
    }
    table
}

fn simulate(a: &SimulateArgs) -> Result<Run> {
    if a.replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    let results: Vec<(DataMatrix, Truth)> = (0..a.replicates)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let seed = a.seed + k as u64;
            Ok(match a.design {
                Design::Checkerboard => {
                    let spec = CheckerboardSpec::new(a.rows, a.cols, a.row_groups, a.col_groups, a.sigma, seed);
                    let cb = generate_checkerboard(&spec)?;
                    let means = (0..cb.row_truth.n_clusters())
                        .map(|r| {
                            let i = cb.row_truth.labels().iter().position(|&l| l == r).unwrap();
                            (0..cb.col_truth.n_clusters())
                                .map(|c| {
                                    let j = cb.col_truth.labels().iter().position(|&l| l == c).unwrap();
                                    cb.means[[cb.row_groups[i], cb.col_groups[j]]]
                                })
                                .collect()
                        })
                        .collect();
                    let truth = Truth {
                        schema: SCHEMA,
                        design: a.design,
                        seed,
                        row_labels: cb.row_truth.one_based(),
                        col_labels: cb.col_truth.one_based(),
                        cell_labels: None,
                        means,
                        spec: serde_json::to_value(&spec)?,
                    };
                    (cb.x, truth)
                }
                Design::Nonckb => {
                    let dims = NonckbDims {
                        rows: a.row_blocks.as_slice().try_into().context("--row-blocks needs 2 values")?,
                        cols: a.col_blocks.as_slice().try_into().context("--col-blocks needs 3 values")?,
                    };
                    let sd = a.noise_sd.unwrap_or_else(default_nonckb_sd);
                    let nc = generate_nonckb(sd, dims, seed)?;
                    let noiseless = generate_nonckb(0.0, dims, seed)?;
                    let truth = Truth {
                        schema: SCHEMA,
                        design: a.design,
                        seed,
                        row_labels: nc.row_truth.one_based(),
                        col_labels: nc.col_truth.one_based(),
                        cell_labels: Some(nc.truth.one_based()),
                        means: label_means(&noiseless.x, &nc.row_truth, &nc.col_truth),
                        spec: serde_json::json!({ "noise_sd": sd, "dims": dims, "seed": seed }),
                    };
                    (nc.x, truth)
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut staged = Staged::default();
    for (k, (x, truth)) in results.iter().enumerate() {
        let prefix = if a.replicates == 1 { a.out.clone() } else { with_suffix(&a.out, &format!(".r{k}")) };
        staged.add_with(with_suffix(&prefix, ".csv"), |buf| write_matrix_csv(buf, &x.view(), None))?;
        staged.add_json(with_suffix(&prefix, ".truth.json"), truth)?;
    }
    Ok(Run {
        staged,
        converged: true,
        inputs: vec![],
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}

fn fit(a: &FitArgs) -> Result<Run> {
    if a.replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    let x = read_matrix(&a.input)?;
    let params = pipeline_params(&a.weights, &a.solver, None);
    let reports: Vec<(FitReport, BiclusterFit)> = (0..a.replicates)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let seed = a.seed + k as u64;
            let xk = if a.perturb > 0.0 { perturb(&x, a.perturb, seed)? } else { x.clone() };
            let graphs = graphs_for(&xk, &params)?;
            let gamma = match (a.gamma, a.gamma_fraction) {
                (Some(g), _) => g,
                (None, Some(f)) => f * gamma_max(&xk, &graphs, &params)?,
                (None, None) => bail!("one of --gamma or --gamma-fraction is required"),
            };
            let fit = fit_at(&xk, &graphs, gamma, &params)?;
            let mut report = report_for(&xk, &fit, &params, &graphs);
            report.seed = (a.perturb > 0.0).then_some(seed);
            Ok((report, fit))
        })
        .collect::<Result<_>>()?;

    let mut staged = Staged::default();
    for (k, (report, fit)) in reports.iter().enumerate() {
        staged.add_json(replicate_path(&a.out, k, a.replicates), report)?;
        if let Some(u_out) = &a.u_out {
            staged.add_with(replicate_path(u_out, k, a.replicates), |buf| {
                write_matrix_csv(buf, &fit.u.view(), None)
            })?;
        }
        if let Some(prefix) = &a.assignments_out {
            let prefix = replicate_path(prefix, k, a.replicates);
            staged.add_with(with_suffix(&prefix, ".rows.csv"), |buf| write_assignments(buf, fit.row_partition()))?;
            staged.add_with(with_suffix(&prefix, ".cols.csv"), |buf| write_assignments(buf, fit.col_partition()))?;
        }
    }
    Ok(Run {
        staged,
        converged: reports.iter().all(|(r, _)| r.converged),
        inputs: vec![a.input.clone()],
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}

fn path(a: &PathArgs) -> Result<Run> {
    let x = read_matrix(&a.input)?;
    let params = pipeline_params(&a.weights, &a.solver, None);
    let graphs = graphs_for(&x, &params)?;
    let grid = match &a.grid {
        Some(g) => g.clone(),
        None => {
            let gmax = gamma_max(&x, &graphs, &params)?;
            default_gamma_grid(if gmax > 0.0 { gmax } else { 1.0 }, a.grid_size)?
        }
    };
    let path = solution_path(&x, &graphs.rows, &graphs.cols, &grid, &params.solver)?;
    let reports: Vec<FitReport> = path
        .points
        .iter()
        .map(|pt| {
            let mut r = report_for(&x, &pt.fit, &params, &graphs);
            r.warm_from = pt.warm_from;
            r
        })
        .collect();
    let mut staged = Staged::default();
    staged.add_json(&a.out, &reports)?;
    Ok(Run {
        staged,
        converged: reports.iter().all(|r| r.converged),
        inputs: vec![a.input.clone()],
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}

#[derive(Serialize)]
struct SelectionReport<'a> {
    schema: &'static str,
    gamma_star: f64,
    gamma_max: f64,
    grid: &'a [f64],
    holdout_fraction: f64,
    holdout_seed: u64,
    holdout_cells: usize,
    curve: &'a [ValidationRecord],
    fit: FitReport,
}

fn select(a: &SelectArgs) -> Result<Run> {
    let x = read_matrix(&a.input)?;
    let params = pipeline_params(&a.weights, &a.solver, Some(&a.selection));
    let (p, n) = x.shape();
    let mut inputs = vec![a.input.clone()];
    let holdout = match &a.mask {
        Some(mask) => {
            let file = File::open(mask).with_context(|| format!("opening {}", mask.display()))?;
            let theta = read_mask(file, p, n)?;
            inputs.push(mask.clone());
            HoldoutSpec {
                fraction: theta.len() as f64 / (p * n) as f64,
                theta,
                seed: a.selection.seed,
            }
        }
        None => sample_holdout(p, n, a.selection.fraction, a.selection.seed)?,
    };
    let graphs = graphs_for(&x, &params)?;
    let result = select_and_fit_with(&x, graphs, &params, holdout)?;
    let mut fit = report_for(&x, &result.fit, &params, &result.graphs);
    fit.seed = Some(a.selection.seed);
    let report = SelectionReport {
        schema: SCHEMA,
        gamma_star: result.selection.gamma_star,
        gamma_max: result.gamma_max,
        grid: &result.grid,
        holdout_fraction: result.holdout.fraction,
        holdout_seed: result.holdout.seed,
        holdout_cells: result.holdout.theta.len(),
        curve: &result.selection.curve.records,
        fit,
    };
    let stem = stem_of(&a.out);
    let mut staged = Staged::default();
    staged.add_json(&a.out, &report)?;
    staged.add_with(with_suffix(&stem, ".curve.csv"), |buf| result.selection.curve.write_csv(buf))?;
    staged.add_with(with_suffix(&stem, ".mask.csv"), |buf| write_mask(buf, &result.holdout.theta))?;
    Ok(Run {
        staged,
        converged: report.fit.converged,
        inputs,
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}

fn refine(a: &RefineArgs) -> Result<Run> {
    let x = read_matrix(&a.input)?;
    let params = pipeline_params(&a.weights, &a.solver, Some(&a.selection));
    let report = match a.method {
        RefineMethod::Threshold => {
            let (fit, graphs, seed) = match a.gamma {
                Some(g) => {
                    let graphs = graphs_for(&x, &params)?;
                    (fit_at(&x, &graphs, g, &params)?, graphs, None)
                }
                None => {
                    let r = run_pipeline(&x, &params)?;
                    (r.fit, r.graphs, Some(params.seed))
                }
            };
            let (rows, cols) = thresholded_assign(&fit, a.threshold_fraction)?;
            let mut report = FitReport::with_partitions(&x, &fit, &params.solver, &rows, &cols);
            report.weights = Some(WeightsMeta::from_pipeline(&x, &params, &graphs));
            report.seed = seed;
            report.refinement = Some(format!("threshold(fraction={})", a.threshold_fraction));
            report
        }
        RefineMethod::Adaptive => {
            if a.gamma.is_some() {
                bail!("--gamma applies to thresholding only; adaptive refinement selects its own level");
            }
            let r = adaptive_cobra(&x, &params)?;
            let mut report = report_for(&x, &r.second.fit, &params, &r.second.graphs);
            if let Some(w) = report.weights.as_mut() {
                w.computed_on = "first-pass centroids, grand-mean centered, unit Frobenius norm".to_owned();
            }
            report.seed = Some(params.seed);
            report.refinement = Some("adaptive".to_owned());
            report
        }
    };
    let mut staged = Staged::default();
    staged.add_json(&a.out, &report)?;
    Ok(Run {
        staged,
        converged: report.converged,
        inputs: vec![a.input.clone()],
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}

fn labels_field(value: &serde_json::Value, key: &str, path: &Path) -> Result<Vec<u64>> {
    let arr = value
        .get(key)
        .and_then(|v| v.as_array())
        .with_context(|| format!("{} has no '{key}' array", path.display()))?;
    arr.iter()
        .map(|v| v.as_u64().with_context(|| format!("non-integer label in '{key}' of {}", path.display())))
        .collect()
}

fn read_partition(path: &Path, axis: EvalAxis) -> Result<Partition> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // a selection report nests its fit
        let value = value.get("fit").cloned().unwrap_or(value);
        return Ok(match axis {
            EvalAxis::Rows => Partition::from_keys(&labels_field(&value, "row_labels", path)?),
            EvalAxis::Cols => Partition::from_keys(&labels_field(&value, "col_labels", path)?),
            EvalAxis::Biclusters => match value.get("cell_labels") {
                Some(_) => Partition::from_keys(&labels_field(&value, "cell_labels", path)?),
                None => bicluster_flatten(
                    &Partition::from_keys(&labels_field(&value, "row_labels", path)?),
                    &Partition::from_keys(&labels_field(&value, "col_labels", path)?),
                ),
            },
        });
    }
    read_assignments(text.as_bytes()).with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct MetricsReport {
    schema: &'static str,
    axis: EvalAxis,
    #[serde(flatten)]
    comparison: Comparison,
}

fn evaluate(a: &EvaluateArgs) -> Result<Run> {
    let pa = read_partition(&a.a, a.axis)?;
    let pb = read_partition(&a.b, a.axis)?;
    let comparison = compare(&pa, &pb)?;
    let mut staged = Staged::default();
    staged.add_json(
        &a.out,
        &MetricsReport {
            schema: SCHEMA,
            axis: a.axis,
            comparison,
        },
    )?;
    Ok(Run {
        staged,
        converged: true,
        inputs: vec![a.a.clone(), a.b.clone()],
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}

fn heatmap(a: &HeatmapArgs) -> Result<Run> {
    let text = std::fs::read_to_string(&a.fit).with_context(|| format!("reading {}", a.fit.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.fit.display()))?;
    let fit_text = match value.get("fit") {
        Some(fit) => fit.to_string(),
        None => text,
    };
    let report = FitReport::from_json(&fit_text).with_context(|| format!("parsing {}", a.fit.display()))?;
    let x = read_matrix(&a.input)?;
    if x.shape() != report.shape {
        bail!(
            "fit is {}x{} but {} is {}x{}",
            report.shape.0,
            report.shape.1,
            a.input.display(),
            x.shape().0,
            x.shape().1
        );
    }
    let u = report.u_matrix()?;
    let opts = HeatmapOptions {
        size: a.size,
        ..HeatmapOptions::default()
    };
    let svg = render_svg(&u.view(), &report.row_partition(), &report.col_partition(), &opts)?;
    let mut staged = Staged::default();
    staged.add(&a.out, svg.into_bytes());
    Ok(Run {
        staged,
        converged: true,
        inputs: vec![a.fit.clone(), a.input.clone()],
        parameters: params_json(a)?,
        primary: a.out.clone(),
    })
}
