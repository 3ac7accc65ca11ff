//! Post-hoc refinements: hard-thresholding small edge differences, and a
//! second pass with weights recomputed from the first pass's centroids.

use crate::biclust::{AxisFit, BiclusterFit};
use crate::error::{invalid, Result};
use crate::matrix::{DataMatrix, Partition};
use crate::pipeline::{build_graphs, run_pipeline, select_and_fit, PipelineParams, PipelineResult};
use crate::weights::UnionFind;

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.25;

/// Population standard deviation; zero for fewer than two values.
fn population_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Threshold `fraction * sd(norms)`.
pub fn threshold_for(norms: &[f64], fraction: f64) -> f64 {
    fraction * population_sd(norms)
}

/// Components after fusing every edge whose norm is below `tau` or within `fuse_tol`.
pub fn threshold_components(
    node_count: usize,
    edges: &[(usize, usize)],
    norms: &[f64],
    tau: f64,
    fuse_tol: f64,
) -> Partition {
    let mut uf = UnionFind::new(node_count);
    for (&(i, j), &norm) in edges.iter().zip(norms) {
        if norm < tau || norm <= fuse_tol {
            uf.union(i, j);
        }
    }
    uf.partition()
}

fn threshold_axis(axis: &AxisFit, fraction: f64) -> Partition {
    let norms = axis.difference_norms();
    let tau = threshold_for(&norms, fraction);
    threshold_components(axis.partition.len(), &axis.edges, &norms, tau, axis.fuse_tol)
}

/// Row and column partitions after zeroing edge differences shorter than
/// `fraction` times the standard deviation of that axis's difference norms.
pub fn thresholded_assign(fit: &BiclusterFit, fraction: f64) -> Result<(Partition, Partition)> {
    if !(fraction.is_finite() && (0.0..=1.0).contains(&fraction)) {
        return invalid(format!("threshold fraction must lie in [0, 1], got {fraction}"));
    }
    Ok((threshold_axis(&fit.rows, fraction), threshold_axis(&fit.cols, fraction)))
}

#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub first: PipelineResult,
    pub second: PipelineResult,
}

/// Runs the pipeline, rebuilds both weight graphs from the fitted centroids,
/// then reselects `gamma` and refits the original data on the new graphs.
pub fn adaptive_cobra(x: &DataMatrix, params: &PipelineParams) -> Result<AdaptiveResult> {
    let first = run_pipeline(x, params)?;
    let centroids = first.fit.u.as_data();
    let graphs = build_graphs(&centroids, params)?;
    let second = select_and_fit(x, graphs, params)?;
    Ok(AdaptiveResult { first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_arithmetic() {
        let norms = [0.01, 0.011, 5.0, 5.2];
        let tau = threshold_for(&norms, 0.25);
        assert!((tau - 0.6364).abs() < 1e-4, "{tau}");
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4)];
        let p = threshold_components(5, &edges, &norms, tau, 1e-9);
        assert_eq!(p.labels(), &[0, 0, 0, 1, 2]);
    }

    #[test]
    fn degenerate_thresholds() {
        assert_eq!(threshold_for(&[3.0], 0.5), 0.0);
        assert_eq!(threshold_for(&[], 0.5), 0.0);
        assert_eq!(threshold_for(&[2.0, 2.0, 2.0], 1.0), 0.0);
        let p = threshold_components(3, &[(0, 1), (1, 2)], &[2.0, 2.0], 0.0, 1e-9);
        assert_eq!(p.n_clusters(), 3);
    }
}
