//! Dense containers, index sets, partitions and seeded randomness.

use std::collections::HashMap;
use std::hash::Hash;

use ndarray::{Array2, ArrayView2, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CobraError, Result};

fn check_finite(values: &Array2<f64>) -> Result<()> {
    if values.nrows() == 0 || values.ncols() == 0 {
        return Err(CobraError::EmptyMatrix);
    }
    for ((row, col), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(CobraError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// A dense `p x n` data matrix (rows are features, columns are observations).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(CobraError::Parse("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((p, n), flat)
            .map_err(|e| CobraError::Parse(e.to_string()))?;
        Self::new(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.values.view())
    }

    pub fn transpose(&self) -> DataMatrix {
        DataMatrix {
            values: self.values.t().to_owned(),
        }
    }
}

/// An estimate `U` of the checkerboard means matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidMatrix {
    values: Array2<f64>,
}

impl CentroidMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn as_data(&self) -> DataMatrix {
        DataMatrix {
            values: self.values.clone(),
        }
    }
}

impl From<&DataMatrix> for CentroidMatrix {
    fn from(x: &DataMatrix) -> Self {
        CentroidMatrix {
            values: x.values.clone(),
        }
    }
}

pub(crate) fn frobenius_norm(a: &ArrayView2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn frobenius_dist(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> f64 {
    let mut acc = 0.0;
    Zip::from(a).and(b).for_each(|x, y| {
        let d = x - y;
        acc += d * d;
    });
    acc.sqrt()
}

/// Average of all entries.
pub fn mean_value(a: &ArrayView2<f64>) -> f64 {
    let count = a.len() as f64;
    a.iter().sum::<f64>() / count
}

/// Constant matrix holding the grand mean of `x`.
pub fn grand_mean(x: &DataMatrix) -> CentroidMatrix {
    let m = mean_value(&x.view());
    CentroidMatrix {
        values: Array2::from_elem(x.shape(), m),
    }
}

/// Subtracts the grand mean; returns the centered matrix and the mean removed.
pub fn center_grand_mean(x: &DataMatrix) -> (DataMatrix, f64) {
    let m = mean_value(&x.view());
    let values = x.values.mapv(|v| v - m);
    (DataMatrix { values }, m)
}

pub fn frobenius_distance(a: &CentroidMatrix, b: &CentroidMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(CobraError::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(frobenius_dist(&a.view(), &b.view()))
}

/// A set of matrix cells, stored sorted and 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPairSet {
    p: usize,
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl IndexPairSet {
    pub fn new(p: usize, n: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(CobraError::EmptyMatrix);
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate index pair");
        }
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= p || j >= n) {
            return invalid(format!("index pair ({i}, {j}) outside a {p}x{n} matrix"));
        }
        if pairs.len() >= p * n {
            return invalid("index set must leave at least one cell outside it");
        }
        Ok(Self { p, n, pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p, self.n)
    }

    /// Boolean mask, `true` on member cells.
    pub fn mask(&self) -> Array2<bool> {
        let mut m = Array2::from_elem((self.p, self.n), false);
        for &(i, j) in &self.pairs {
            m[[i, j]] = true;
        }
        m
    }
}

/// A grouping of `q` objects into `K` clusters with dense 0-based labels.
///
/// Labels are ordered by the smallest member index: object 0 is always in
/// cluster 0, and a new label is introduced only by the first object that
/// carries it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    /// Relabels arbitrary keys into canonical dense labels.
    pub fn from_keys<K: Hash + Eq + Clone>(keys: &[K]) -> Self {
        let mut seen: HashMap<K, usize> = HashMap::new();
        let labels = keys
            .iter()
            .map(|k| {
                let next = seen.len();
                *seen.entry(k.clone()).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            n_clusters: seen.len(),
        }
    }

    pub fn singletons(q: usize) -> Self {
        Partition {
            labels: (0..q).collect(),
            n_clusters: q,
        }
    }

    pub fn single_cluster(q: usize) -> Self {
        Partition {
            labels: vec![0; q],
            n_clusters: usize::from(q > 0),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Labels shifted to `1..=K` for export.
    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }

    /// Whether every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut image = vec![usize::MAX; self.n_clusters];
        for (&a, &b) in self.labels.iter().zip(&coarser.labels) {
            if image[a] == usize::MAX {
                image[a] = b;
            } else if image[a] != b {
                return false;
            }
        }
        true
    }

    /// Equality up to relabeling.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.n_clusters == other.n_clusters && self.refines(other)
    }
}

/// Explicit seed for every stochastic operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// A fresh ChaCha8 stream; equal seeds give bit-identical streams.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream for a sub-task, e.g. the `index`-th replicate.
    pub fn derive(self, index: u64) -> RngSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_matrix(p: usize, n: usize, seed: u64) -> DataMatrix {
        let mut rng = RngSeed(seed).rng();
        let values = Array2::from_shape_simple_fn((p, n), || StandardNormal.sample(&mut rng));
        DataMatrix::new(values).unwrap()
    }

    #[test]
    fn grand_mean_small() {
        let x = DataMatrix::new(array![[1.0, 3.0], [5.0, 7.0]]).unwrap();
        let m = grand_mean(&x);
        assert!(m.values().iter().all(|&v| v == 4.0));
    }

    #[test]
    fn grand_mean_of_constant_is_itself() {
        let x = DataMatrix::new(Array2::from_elem((3, 5), 2.5)).unwrap();
        assert_eq!(grand_mean(&x).values(), x.values());
    }

    #[test]
    fn grand_mean_matches_direct_summation() {
        let x = normal_matrix(60, 60, 7);
        let mut total = 0.0;
        for i in 0..60 {
            for j in 0..60 {
                total += x.values()[[i, j]];
            }
        }
        let expected = total / 3600.0;
        let got = grand_mean(&x).values()[[13, 41]];
        assert!((got - expected).abs() <= 1e-14);
    }

    #[test]
    fn centering() {
        let x = DataMatrix::new(array![[1.0, 3.0], [5.0, 7.0]]).unwrap();
        let (c, m) = center_grand_mean(&x);
        assert_eq!(m, 4.0);
        assert_eq!(c.values(), &array![[-3.0, -1.0], [1.0, 3.0]]);
        let (again, m2) = center_grand_mean(&c);
        assert_eq!(m2, 0.0);
        assert_eq!(again, c);
    }

    #[test]
    fn centered_random_has_zero_mean() {
        let x = normal_matrix(17, 9, 3);
        let (c, m) = center_grand_mean(&x);
        let residual = grand_mean(&c).values()[[0, 0]];
        assert!(residual.abs() <= 1e-12 * (1.0 + m.abs()));
    }

    #[test]
    fn frobenius_basics() {
        let a = CentroidMatrix::new(array![[0.0, 0.0]]).unwrap();
        let b = CentroidMatrix::new(array![[3.0, 4.0]]).unwrap();
        assert_eq!(frobenius_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(frobenius_distance(&a, &b).unwrap(), 5.0);
        let c = CentroidMatrix::new(array![[1.0], [2.0]]).unwrap();
        assert!(matches!(
            frobenius_distance(&a, &c),
            Err(CobraError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn frobenius_matches_elementwise_sum() {
        let a = CentroidMatrix::from(&normal_matrix(4, 6, 1));
        let b = CentroidMatrix::from(&normal_matrix(4, 6, 2));
        let mut s = 0.0;
        for (x, y) in a.values().iter().zip(b.values().iter()) {
            s += (x - y).powi(2);
        }
        assert!((frobenius_distance(&a, &b).unwrap() - s.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            DataMatrix::new(array![[1.0, f64::NAN]]),
            Err(CobraError::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            DataMatrix::new(Array2::zeros((0, 3))),
            Err(CobraError::EmptyMatrix)
        ));
    }

    #[test]
    fn index_pairs_validate() {
        assert!(IndexPairSet::new(2, 2, vec![(0, 0), (0, 0)]).is_err());
        assert!(IndexPairSet::new(2, 2, vec![(2, 0)]).is_err());
        assert!(IndexPairSet::new(1, 2, vec![(0, 0), (0, 1)]).is_err());
        let s = IndexPairSet::new(2, 3, vec![(1, 2), (0, 1)]).unwrap();
        assert_eq!(s.pairs(), &[(0, 1), (1, 2)]);
        assert!(s.mask()[[1, 2]]);
    }

    #[test]
    fn partitions_are_canonical() {
        let p = Partition::from_keys(&[7, 3, 7, 9, 3]);
        assert_eq!(p.labels(), &[0, 1, 0, 2, 1]);
        assert_eq!(p.n_clusters(), 3);
        assert_eq!(p.cluster_sizes(), vec![2, 2, 1]);
        assert_eq!(p.one_based(), vec![1, 2, 1, 3, 2]);
        let coarse = Partition::from_keys(&[0, 0, 0, 1, 0]);
        assert!(p.refines(&coarse));
        assert!(!coarse.refines(&p));
        assert!(p.same_grouping(&Partition::from_keys(&["a", "b", "a", "c", "b"])));
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = normal_matrix(5, 5, 42);
        let b = normal_matrix(5, 5, 42);
        assert_eq!(a, b);
        assert_ne!(RngSeed(1).derive(0), RngSeed(1).derive(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn mat(p: usize, n: usize) -> impl Strategy<Value = CentroidMatrix> {
            proptest::collection::vec(-100.0f64..100.0, p * n).prop_map(move |v| {
                CentroidMatrix::new(Array2::from_shape_vec((p, n), v).unwrap()).unwrap()
            })
        }

        proptest! {
            #[test]
            fn frobenius_is_a_metric(a in mat(3, 4), b in mat(3, 4), c in mat(3, 4)) {
                let ab = frobenius_distance(&a, &b).unwrap();
                let ba = frobenius_distance(&b, &a).unwrap();
                let bc = frobenius_distance(&b, &c).unwrap();
                let ac = frobenius_distance(&a, &c).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, ba);
                prop_assert!(ac <= ab + bc + 1e-12);
            }

            #[test]
            fn centering_zeroes_the_mean(a in mat(4, 5)) {
                let x = a.as_data();
                let (c, m) = center_grand_mean(&x);
                let r = grand_mean(&c).values()[[0, 0]];
                prop_assert!(r.abs() <= 1e-12 * (1.0 + m.abs()));
            }
        }
    }
}
