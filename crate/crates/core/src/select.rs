//! Choosing `gamma` by hold-out prediction: mask a fraction of cells, impute
//! them by majorization-minimization, and score each grid value on the mask.

use ndarray::{Array2, Zip};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::biclust::{cobra_fit, penalty_value, validate_grid, BiclustProblem, DykstraState, SolverOptions};
use crate::error::{invalid, CobraError, Result};
use crate::matrix::{frobenius_norm, DataMatrix, IndexPairSet, RngSeed};
use crate::weights::WeightedGraph;

const MAX_HOLDOUT_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSpec {
    pub theta: IndexPairSet,
    pub fraction: f64,
    pub seed: u64,
}

/// Uniform sample of `round(fraction * p * n)` cells, redrawn until every row
/// and every column keeps at least one observed cell.
pub fn sample_holdout(p: usize, n: usize, fraction: f64, seed: u64) -> Result<HoldoutSpec> {
    if p == 0 || n == 0 {
        return Err(CobraError::EmptyMatrix);
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return invalid(format!("hold-out fraction must lie in (0, 1), got {fraction}"));
    }
    let total = p * n;
    let count = (fraction * total as f64).round() as usize;
    if total - count < p.max(n) {
        return Err(CobraError::InfeasibleHoldout(format!(
            "masking {count} of {total} cells cannot leave every row and column observed"
        )));
    }
    let mut rng = RngSeed(seed).rng();
    for _ in 0..MAX_HOLDOUT_DRAWS {
        let cells = sample(&mut rng, total, count);
        let mut row_masked = vec![0usize; p];
        let mut col_masked = vec![0usize; n];
        for c in cells.iter() {
            row_masked[c / n] += 1;
            col_masked[c % n] += 1;
        }
        if row_masked.iter().all(|&m| m < n) && col_masked.iter().all(|&m| m < p) {
            let pairs = cells.iter().map(|c| (c / n, c % n)).collect();
            return Ok(HoldoutSpec {
                theta: IndexPairSet::new(p, n, pairs)?,
                fraction,
                seed,
            });
        }
    }
    Err(CobraError::InfeasibleHoldout(format!(
        "no mask of {count} cells kept every row and column observed in {MAX_HOLDOUT_DRAWS} draws"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingOptions {
    pub mm_tol: f64,
    pub max_mm: usize,
    pub solver: SolverOptions,
}

impl Default for MissingOptions {
    fn default() -> Self {
        Self {
            mm_tol: 1e-5,
            max_mm: 100,
            solver: SolverOptions {
                settle_partitions: false,
                ..SolverOptions::default()
            },
        }
    }
}

/// Result of imputing the masked cells at one `gamma`.
#[derive(Debug, Clone)]
pub struct MissingFit {
    pub u: Array2<f64>,
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Masked objective at the initial point and after every accepted update.
    pub objective_trace: Vec<f64>,
    pub state: DykstraState,
}

/// `1/2 ||P_obs(X - U)||_F^2 + gamma * J(U)`.
pub fn masked_objective(
    x: &DataMatrix,
    u: &Array2<f64>,
    mask: &Array2<bool>,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    gamma: f64,
) -> Result<f64> {
    let mut loss = 0.0;
    Zip::from(x.values()).and(u).and(mask).for_each(|&a, &b, &m| {
        if !m {
            loss += (a - b) * (a - b);
        }
    });
    Ok(0.5 * loss + gamma * penalty_value(&u.view(), row_graph, col_graph)?)
}

/// Observed cells of `x` with masked cells taken from `fill`.
fn complete(x: &DataMatrix, fill: &Array2<f64>, mask: &Array2<bool>) -> Result<DataMatrix> {
    let mut m = x.values().clone();
    Zip::from(&mut m).and(fill).and(mask).for_each(|a, &b, &masked| {
        if masked {
            *a = b;
        }
    });
    DataMatrix::new(m)
}

/// Initial point: observed cells of `x`, masked cells set to the observed mean.
pub fn initial_fill(x: &DataMatrix, theta: &IndexPairSet) -> Array2<f64> {
    let mask = theta.mask();
    let (mut sum, mut count) = (0.0, 0usize);
    Zip::from(x.values()).and(&mask).for_each(|&a, &m| {
        if !m {
            sum += a;
            count += 1;
        }
    });
    let mean = sum / count as f64;
    let mut u = x.values().clone();
    Zip::from(&mut u).and(&mask).for_each(|a, &m| {
        if m {
            *a = mean;
        }
    });
    u
}

/// Majorization-minimization for the fit with cells in `theta` unobserved.
///
/// Each step refits on the data completed with the current estimate. An update
/// is accepted only if the masked objective does not increase; otherwise the
/// step is re-solved with a tenfold tighter outer tolerance, up to three
/// times, and the iteration stops at the current estimate if none succeeds.
pub fn cobra_missing(
    x: &DataMatrix,
    theta: &IndexPairSet,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    gamma: f64,
    opts: &MissingOptions,
    warm: Option<&MissingFit>,
) -> Result<MissingFit> {
    if theta.shape() != x.shape() {
        return Err(CobraError::ShapeMismatch {
            expected: x.shape(),
            found: theta.shape(),
        });
    }
    if gamma == 0.0 && !theta.is_empty() {
        return invalid("gamma = 0 leaves masked cells undetermined; use a positive gamma");
    }
    if !(opts.mm_tol.is_finite() && opts.mm_tol > 0.0) || opts.max_mm == 0 {
        return invalid("mm_tol must be positive and max_mm at least 1");
    }
    let mask = theta.mask();
    let x_scale = 1.0 + x.frobenius_norm();
    let (mut u, mut state) = match warm.filter(|w| w.u.dim() == x.shape()) {
        Some(w) => (w.u.clone(), Some(w.state.clone())),
        None => (initial_fill(x, theta), None),
    };
    let mut objective = masked_objective(x, &u, &mask, row_graph, col_graph, gamma)?;
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_mm {
        iterations += 1;
        let m = complete(x, &u, &mask)?;
        let problem = BiclustProblem {
            x: &m,
            col_graph,
            row_graph,
            gamma,
        };
        let mut solver = opts.solver;
        let mut accepted = None;
        for _ in 0..4 {
            let fit = cobra_fit(&problem, &solver, state.as_ref())?;
            let next = masked_objective(x, fit.u.values(), &mask, row_graph, col_graph, gamma)?;
            if next <= objective {
                accepted = Some((fit, next));
                break;
            }
            state = Some(fit.state);
            solver.outer_tol /= 10.0;
        }
        let Some((fit, next)) = accepted else {
            converged = true;
            break;
        };
        let step = frobenius_norm(&(fit.u.values() - &u).view());
        u.assign(fit.u.values());
        objective = next;
        trace.push(objective);
        state = Some(fit.state);
        if step <= opts.mm_tol * x_scale {
            converged = true;
            break;
        }
    }

    let state = state.expect("max_mm >= 1 guarantees a refit");
    Ok(MissingFit {
        u,
        gamma,
        iterations,
        converged,
        objective_trace: trace,
        state,
    })
}

/// `||P_theta(X - U)||_F`.
pub fn holdout_error(x: &DataMatrix, u: &Array2<f64>, theta: &IndexPairSet) -> f64 {
    theta
        .pairs()
        .iter()
        .map(|&(i, j)| (x.values()[[i, j]] - u[[i, j]]).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub gamma: f64,
    pub holdout_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationCurve {
    pub records: Vec<ValidationRecord>,
}

impl ValidationCurve {
    /// Grid value with the smallest error; ties go to the smaller `gamma`.
    pub fn argmin(&self) -> Option<f64> {
        let mut best: Option<&ValidationRecord> = None;
        for r in &self.records {
            if best.is_none_or(|b| r.holdout_error < b.holdout_error) {
                best = Some(r);
            }
        }
        best.map(|r| r.gamma)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gamma", "holdout_error", "iterations", "converged"])?;
        for r in &self.records {
            w.write_record([
                format!("{:e}", r.gamma),
                format!("{:e}", r.holdout_error),
                r.iterations.to_string(),
                r.converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub gamma_star: f64,
    pub curve: ValidationCurve,
}

/// Imputes the masked cells at each positive grid value, warm-starting from
/// the previous one, and picks the value with the smallest hold-out error.
/// A zero grid value is skipped because the masked cells are then undetermined.
pub fn select_gamma(
    x: &DataMatrix,
    theta: &IndexPairSet,
    row_graph: &WeightedGraph,
    col_graph: &WeightedGraph,
    grid: &[f64],
    opts: &MissingOptions,
) -> Result<Selection> {
    validate_grid(grid)?;
    if theta.is_empty() {
        return invalid("hold-out set is empty");
    }
    let mut curve = ValidationCurve::default();
    let mut prev: Option<MissingFit> = None;
    for &gamma in grid.iter().filter(|&&g| g > 0.0) {
        let fit = cobra_missing(x, theta, row_graph, col_graph, gamma, opts, prev.as_ref())?;
        curve.records.push(ValidationRecord {
            gamma,
            holdout_error: holdout_error(x, &fit.u, theta),
            iterations: fit.iterations,
            converged: fit.converged,
        });
        prev = Some(fit);
    }
    let gamma_star = curve
        .argmin()
        .ok_or_else(|| CobraError::InvalidParameter("grid has no positive value".into()))?;
    Ok(Selection { gamma_star, curve })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdout_count_and_determinism() {
        let a = sample_holdout(10, 10, 0.1, 3).unwrap();
        assert_eq!(a.theta.len(), 10);
        let b = sample_holdout(10, 10, 0.1, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.theta, sample_holdout(10, 10, 0.1, 4).unwrap().theta);
    }

    #[test]
    fn holdout_coverage_and_inclusion_rate() {
        let mut hits = Array2::<f64>::zeros((30, 30));
        for seed in 0..100 {
            let h = sample_holdout(30, 30, 0.1, seed).unwrap();
            let mask = h.theta.mask();
            for i in 0..30 {
                assert!(mask.row(i).iter().any(|&m| !m));
                assert!(mask.column(i).iter().any(|&m| !m));
            }
            for &(i, j) in h.theta.pairs() {
                hits[[i, j]] += 1.0;
            }
        }
        let rate = hits.sum() / (100.0 * 900.0);
        assert!((rate - 0.1).abs() < 0.02);
    }

    #[test]
    fn infeasible_holdout() {
        assert!(matches!(sample_holdout(2, 2, 0.7, 1), Err(CobraError::InfeasibleHoldout(_))));
        assert_eq!(sample_holdout(2, 2, 0.5, 1).unwrap().theta.len(), 2);
        assert!(sample_holdout(2, 2, 0.0, 1).is_err());
        assert!(sample_holdout(2, 2, 1.0, 1).is_err());
    }

    #[test]
    fn argmin_prefers_smaller_gamma_on_ties() {
        let rec = |gamma, e| ValidationRecord { gamma, holdout_error: e, iterations: 1, converged: true };
        let curve = ValidationCurve { records: vec![rec(1.0, 0.5), rec(2.0, 0.2), rec(3.0, 0.2)] };
        assert_eq!(curve.argmin(), Some(2.0));
    }
}
