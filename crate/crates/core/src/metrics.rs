//! Partition similarity: Rand index, adjusted Rand index and variation of information.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::matrix::Partition;

/// Cross-tabulation of two partitions of the same objects. Only nonzero cells are stored.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    cells: BTreeMap<(usize, usize), usize>,
    row_marginals: Vec<usize>,
    col_marginals: Vec<usize>,
    total: usize,
}

impl ContingencyTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self> {
        if a.len() != b.len() {
            return invalid(format!("partitions cover {} and {} objects", a.len(), b.len()));
        }
        let mut cells = BTreeMap::new();
        let mut row_marginals = vec![0; a.n_clusters()];
        let mut col_marginals = vec![0; b.n_clusters()];
        for (&i, &j) in a.labels().iter().zip(b.labels()) {
            *cells.entry((i, j)).or_insert(0) += 1;
            row_marginals[i] += 1;
            col_marginals[j] += 1;
        }
        Ok(Self {
            cells,
            row_marginals,
            col_marginals,
            total: a.len(),
        })
    }

    pub fn count(&self, i: usize, j: usize) -> usize {
        self.cells.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn nonzero_counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.values().copied()
    }

    pub fn row_marginals(&self) -> &[usize] {
        &self.row_marginals
    }

    pub fn col_marginals(&self) -> &[usize] {
        &self.col_marginals
    }

    pub fn total(&self) -> usize {
        self.total
    }

    fn pair_sums(&self) -> (f64, f64, f64, f64) {
        let cells = self.nonzero_counts().map(choose2).sum();
        let rows = self.row_marginals.iter().map(|&c| choose2(c)).sum();
        let cols = self.col_marginals.iter().map(|&c| choose2(c)).sum();
        (cells, rows, cols, choose2(self.total))
    }

    pub fn rand_index(&self) -> Result<f64> {
        if self.total < 2 {
            return invalid("rand index needs at least two objects");
        }
        let (cells, rows, cols, all) = self.pair_sums();
        // together in both + apart in both
        let agree = cells + (all - rows - cols + cells);
        Ok(agree / all)
    }

    pub fn adjusted_rand_index(&self) -> Result<AdjustedRand> {
        if self.total < 2 {
            return invalid("adjusted rand index needs at least two objects");
        }
        let (cells, rows, cols, all) = self.pair_sums();
        let expected = rows * cols / all;
        let max = 0.5 * (rows + cols);
        if max == expected {
            let identical = cells == rows && cells == cols;
            return Ok(AdjustedRand {
                value: if identical { 1.0 } else { 0.0 },
                degenerate: true,
            });
        }
        Ok(AdjustedRand {
            value: (cells - expected) / (max - expected),
            degenerate: false,
        })
    }

    /// Variation of information in bits.
    pub fn variation_of_information(&self) -> Result<f64> {
        if self.total < 1 {
            return invalid("variation of information needs at least one object");
        }
        // H(A) + H(B) - 2 I(A, B), summed cell by cell so that every term is
        // nonnegative and identical partitions give exactly zero
        let q = self.total as f64;
        let mut vi = 0.0;
        for (&(i, j), &c) in &self.cells {
            let c = c as f64;
            let (a, b) = (self.row_marginals[i] as f64, self.col_marginals[j] as f64);
            vi += (c / q) * ((a / c).log2() + (b / c).log2());
        }
        Ok(vi.max(0.0))
    }
}

fn choose2(c: usize) -> f64 {
    let c = c as f64;
    0.5 * c * (c - 1.0)
}

/// ARI together with a flag for the `0/0` case, where the value is set by convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustedRand {
    pub value: f64,
    pub degenerate: bool,
}

pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    ContingencyTable::new(a, b)?.rand_index()
}

pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    Ok(ContingencyTable::new(a, b)?.adjusted_rand_index()?.value)
}

pub fn variation_of_information(a: &Partition, b: &Partition) -> Result<f64> {
    ContingencyTable::new(a, b)?.variation_of_information()
}

/// All three scores from one table build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub ri: f64,
    pub ari: f64,
    pub ari_degenerate: bool,
    pub vi: f64,
    pub q: usize,
    pub clusters_1: usize,
    pub clusters_2: usize,
}

pub fn compare(a: &Partition, b: &Partition) -> Result<Comparison> {
    let table = ContingencyTable::new(a, b)?;
    let ari = table.adjusted_rand_index()?;
    Ok(Comparison {
        ri: table.rand_index()?,
        ari: ari.value,
        ari_degenerate: ari.degenerate,
        vi: table.variation_of_information()?,
        q: table.total(),
        clusters_1: a.n_clusters(),
        clusters_2: b.n_clusters(),
    })
}

/// Cell partition of a `p x n` matrix by (row cluster, column cluster), cells in row-major order.
pub fn bicluster_flatten(rows: &Partition, cols: &Partition) -> Partition {
    let mut keys = Vec::with_capacity(rows.len() * cols.len());
    for &r in rows.labels() {
        for &c in cols.labels() {
            keys.push((r, c));
        }
    }
    Partition::from_keys(&keys)
}
