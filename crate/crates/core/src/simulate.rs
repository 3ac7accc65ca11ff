//! Synthetic inputs: checkerboard matrices with unequal group sizes, the
//! five-bicluster non-checkerboard layout, and additive perturbation.

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CobraError, Result};
use crate::matrix::{DataMatrix, Partition, RngSeed};

const MAX_ASSIGNMENT_DRAWS: usize = 100_000;

/// `{-6, -5.5, ..., 6}`.
pub fn default_mean_levels() -> Vec<f64> {
    (0..25).map(|k| -6.0 + 0.5 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerboardSpec {
    pub p: usize,
    pub n: usize,
    pub row_groups: usize,
    pub col_groups: usize,
    pub mean_levels: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl CheckerboardSpec {
    pub fn new(p: usize, n: usize, row_groups: usize, col_groups: usize, sigma: f64, seed: u64) -> Self {
        Self {
            p,
            n,
            row_groups,
            col_groups,
            mean_levels: default_mean_levels(),
            sigma,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(CobraError::EmptyMatrix);
        }
        if self.row_groups == 0 || self.col_groups == 0 {
            return invalid("group counts must be positive");
        }
        if self.row_groups > self.p || self.col_groups > self.n {
            return invalid(format!(
                "cannot place {} x {} nonempty groups in a {} x {} matrix",
                self.row_groups, self.col_groups, self.p, self.n
            ));
        }
        if self.mean_levels.is_empty() || self.mean_levels.iter().any(|m| !m.is_finite()) {
            return invalid("mean levels must be a nonempty set of finite values");
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return invalid("sigma must be finite and nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Checkerboard {
    pub x: DataMatrix,
    pub row_truth: Partition,
    pub col_truth: Partition,
    /// Block means indexed by (row group, column group), groups 0-based in draw order.
    pub means: Array2<f64>,
    /// Raw group draws, before relabeling into first-appearance order.
    pub row_groups: Vec<usize>,
    pub col_groups: Vec<usize>,
}

/// Draws `len` labels with `P(group i) ∝ 1/(i+1)`, redrawing the whole vector until no group is empty.
pub fn draw_groups<R: Rng>(rng: &mut R, len: usize, groups: usize) -> Result<Vec<usize>> {
    if groups == 0 || groups > len {
        return invalid(format!("cannot place {groups} nonempty groups among {len} objects"));
    }
    let dist = WeightedIndex::new((1..=groups).map(|i| 1.0 / i as f64))
        .map_err(|e| CobraError::InvalidParameter(e.to_string()))?;
    for _ in 0..MAX_ASSIGNMENT_DRAWS {
        let labels: Vec<usize> = (0..len).map(|_| dist.sample(rng)).collect();
        let mut seen = vec![false; groups];
        labels.iter().for_each(|&g| seen[g] = true);
        if seen.iter().all(|&s| s) {
            return Ok(labels);
        }
    }
    invalid(format!(
        "no assignment with all {groups} groups nonempty among {len} objects after {MAX_ASSIGNMENT_DRAWS} draws"
    ))
}

pub fn generate_checkerboard(spec: &CheckerboardSpec) -> Result<Checkerboard> {
    spec.validate()?;
    let seed = RngSeed(spec.seed);
    let row_groups = draw_groups(&mut seed.derive(0).rng(), spec.p, spec.row_groups)?;
    let col_groups = draw_groups(&mut seed.derive(1).rng(), spec.n, spec.col_groups)?;
    let mut mean_rng = seed.derive(2).rng();
    let levels = spec.mean_levels.len();
    let means = Array2::from_shape_simple_fn((spec.row_groups, spec.col_groups), || {
        spec.mean_levels[mean_rng.random_range(0..levels)]
    });
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| CobraError::InvalidParameter(e.to_string()))?;
    let mut noise_rng = seed.derive(3).rng();
    let mut x = Array2::zeros((spec.p, spec.n));
    for i in 0..spec.p {
        for j in 0..spec.n {
            let eps = if spec.sigma > 0.0 { noise.sample(&mut noise_rng) } else { 0.0 };
            x[[i, j]] = means[[row_groups[i], col_groups[j]]] + eps;
        }
    }
    Ok(Checkerboard {
        x: DataMatrix::new(x)?,
        row_truth: Partition::from_keys(&row_groups),
        col_truth: Partition::from_keys(&col_groups),
        means,
        row_groups,
        col_groups,
    })
}

/// Means `(a, b, c, d, e)` of the five-bicluster layout.
pub const NONCKB_MEANS: [f64; 5] = [1.0, 0.0, 0.25, -1.0, 1.25];

/// Noise standard deviation for a noise variance of 0.1.
pub fn default_nonckb_sd() -> f64 {
    0.1f64.sqrt()
}

/// Block sizes for the 2 x 3 layout `[a a d; b c e]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonckbDims {
    pub rows: [usize; 2],
    pub cols: [usize; 3],
}

impl Default for NonckbDims {
    fn default() -> Self {
        Self { rows: [10, 10], cols: [8, 8, 8] }
    }
}

#[derive(Debug, Clone)]
pub struct Nonckb {
    pub x: DataMatrix,
    /// Cell partition (row-major) with five labels.
    pub truth: Partition,
    pub row_truth: Partition,
    pub col_truth: Partition,
}

/// Top row: `a | a | d`; bottom row: `b | c | e`.
pub fn generate_nonckb(noise_sd: f64, dims: NonckbDims, seed: u64) -> Result<Nonckb> {
    if dims.rows.contains(&0) || dims.cols.contains(&0) {
        return invalid("every block needs at least one row and one column");
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return invalid("noise_sd must be finite and nonnegative");
    }
    // block label per (row band, column band): a=0, b=1, c=2, d=3, e=4
    const LAYOUT: [[usize; 3]; 2] = [[0, 0, 3], [1, 2, 4]];
    let band = |sizes: &[usize]| -> Vec<usize> {
        sizes.iter().enumerate().flat_map(|(k, &s)| std::iter::repeat_n(k, s)).collect()
    };
    let row_band = band(&dims.rows);
    let col_band = band(&dims.cols);
    let (p, n) = (row_band.len(), col_band.len());
    let noise = Normal::new(0.0, noise_sd).map_err(|e| CobraError::InvalidParameter(e.to_string()))?;
    let mut rng = RngSeed(seed).rng();
    let mut x = Array2::zeros((p, n));
    let mut cells = Vec::with_capacity(p * n);
    for i in 0..p {
        for j in 0..n {
            let block = LAYOUT[row_band[i]][col_band[j]];
            let eps = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            x[[i, j]] = NONCKB_MEANS[block] + eps;
            cells.push(block);
        }
    }
    Ok(Nonckb {
        x: DataMatrix::new(x)?,
        truth: Partition::from_keys(&cells),
        row_truth: Partition::from_keys(&row_band),
        col_truth: Partition::from_keys(&col_band),
    })
}

/// `X + N(0, sigma^2)` noise, cell by cell in row-major order.
pub fn perturb(x: &DataMatrix, sigma: f64, seed: u64) -> Result<DataMatrix> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return invalid("sigma must be finite and nonnegative");
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| CobraError::InvalidParameter(e.to_string()))?;
    let mut rng = RngSeed(seed).rng();
    let mut out = x.values().clone();
    out.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
    DataMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_checkerboard_is_block_constant() {
        let spec = CheckerboardSpec::new(12, 15, 3, 4, 0.0, 5);
        let cb = generate_checkerboard(&spec).unwrap();
        let levels = default_mean_levels();
        for i in 0..12 {
            for j in 0..15 {
                let v = cb.x.values()[[i, j]];
                assert_eq!(v, cb.means[[cb.row_groups[i], cb.col_groups[j]]]);
                assert!(levels.contains(&v));
            }
        }
        assert_eq!(cb.row_truth.n_clusters(), 3);
        assert_eq!(cb.col_truth.n_clusters(), 4);
        let flat = crate::metrics::bicluster_flatten(&cb.row_truth, &cb.col_truth);
        assert_eq!(flat.n_clusters(), 12);
    }

    #[test]
    fn single_group_and_determinism() {
        let spec = CheckerboardSpec::new(6, 7, 1, 1, 1.0, 2);
        let a = generate_checkerboard(&spec).unwrap();
        let b = generate_checkerboard(&spec).unwrap();
        assert_eq!(a.x.values(), b.x.values());
        assert_eq!(a.row_truth.n_clusters(), 1);
        let other = generate_checkerboard(&CheckerboardSpec { seed: 3, ..spec }).unwrap();
        assert_ne!(a.x.values(), other.x.values());
    }

    #[test]
    fn too_many_groups_is_an_error() {
        assert!(generate_checkerboard(&CheckerboardSpec::new(3, 5, 4, 2, 0.0, 1)).is_err());
        assert!(generate_checkerboard(&CheckerboardSpec::new(5, 3, 2, 4, 0.0, 1)).is_err());
    }

    #[test]
    fn group_frequencies_follow_reciprocals() {
        let mut rng = RngSeed(99).rng();
        let labels = draw_groups(&mut rng, 2000 * 2000 / 100, 4).unwrap();
        let h4: f64 = (1..=4).map(|i| 1.0 / i as f64).sum();
        let mut counts = [0usize; 4];
        labels.iter().for_each(|&g| counts[g] += 1);
        for (i, &c) in counts.iter().enumerate() {
            let expected = 1.0 / ((i + 1) as f64 * h4);
            assert!((c as f64 / labels.len() as f64 - expected).abs() < 0.02);
        }
    }

    #[test]
    fn nonckb_layout() {
        let g = generate_nonckb(0.0, NonckbDims::default(), 1).unwrap();
        let mut values: Vec<f64> = g.x.values().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        assert_eq!(values, vec![-1.0, 0.0, 0.25, 1.0, 1.25]);
        assert_eq!(g.truth.n_clusters(), 5);
        assert_eq!(g.row_truth.n_clusters(), 2);
        assert_eq!(g.col_truth.n_clusters(), 3);
        assert_eq!(g.x.values()[[0, 0]], 1.0);
        assert_eq!(g.x.values()[[0, 10]], 1.0);
        assert_eq!(g.x.values()[[0, 20]], -1.0);
        assert_eq!(g.x.values()[[15, 20]], 1.25);
        assert!(generate_nonckb(0.0, NonckbDims { rows: [0, 3], cols: [1, 1, 1] }, 1).is_err());
    }

    #[test]
    fn perturbation_moments() {
        let x = DataMatrix::new(Array2::zeros((100, 100))).unwrap();
        assert_eq!(perturb(&x, 0.0, 4).unwrap().values(), x.values());
        let a = perturb(&x, 0.7, 4).unwrap();
        let b = perturb(&x, 0.7, 5).unwrap();
        assert_eq!(a.shape(), b.shape());
        assert_ne!(a.values(), b.values());
        let m = a.values().mean().unwrap();
        let sd = (a.values().mapv(|v| (v - m).powi(2)).sum() / 1e4).sqrt();
        assert!((sd / 0.7 - 1.0).abs() < 0.03);
    }
}
