//! File formats: numeric matrices, assignments and masks as CSV, fits as JSON.
//!
//! Indices and labels in files are 1-based.

use std::io::{Read, Write};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::biclust::{block_means, BiclusterFit, BlockMean, SolverOptions};
use crate::error::{CobraError, Result};
use crate::matrix::{DataMatrix, IndexPairSet, Partition};
use crate::pipeline::{Graphs, PipelineParams};
use crate::weights::default_target_sums;

pub const SCHEMA: &str = "cobra/1";

/// A matrix read from CSV with optional header and row-name column.
#[derive(Debug, Clone)]
pub struct LabeledMatrix {
    pub matrix: DataMatrix,
    pub col_names: Option<Vec<String>>,
    pub row_names: Option<Vec<String>>,
}

fn is_number(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Reads a numeric matrix. A first record containing any non-numeric field is
/// taken as a header; a first column that is non-numeric in the first data
/// record is taken as row names.
pub fn read_matrix_csv<R: Read>(input: R) -> Result<LabeledMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(CobraError::EmptyMatrix);
    }
    let header = if records[0].iter().any(|f| !is_number(f)) && records.len() > 1 {
        Some(records[0].iter().map(str::to_owned).collect::<Vec<String>>())
    } else {
        None
    };
    let data = if header.is_some() { &records[1..] } else { &records[..] };
    if data.is_empty() {
        return Err(CobraError::EmptyMatrix);
    }
    let label_col = data[0].get(0).is_some_and(|f| !is_number(f));
    let skip = usize::from(label_col);
    let ncols = data[0].len() - skip;
    let mut values = Vec::with_capacity(data.len() * ncols);
    let mut row_names = Vec::new();
    for (r, rec) in data.iter().enumerate() {
        if rec.len() - skip != ncols {
            return Err(CobraError::Parse(format!(
                "row {} has {} values, expected {ncols}",
                r + 1,
                rec.len() - skip
            )));
        }
        if label_col {
            row_names.push(rec[0].to_owned());
        }
        for (c, field) in rec.iter().skip(skip).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CobraError::Parse(format!("row {}, column {}: '{field}' is not a number", r + 1, c + 1))
            })?;
            values.push(v);
        }
    }
    let matrix = DataMatrix::new(
        Array2::from_shape_vec((data.len(), ncols), values).map_err(|e| CobraError::Parse(e.to_string()))?,
    )?;
    // a header over a row-name column may or may not name that column
    let col_names = header.map(|h| {
        if h.len() == ncols + skip {
            h[skip..].to_vec()
        } else {
            h
        }
    });
    if let Some(names) = &col_names {
        if names.len() != ncols {
            return Err(CobraError::Parse(format!(
                "header has {} names for {ncols} columns",
                names.len()
            )));
        }
    }
    Ok(LabeledMatrix {
        matrix,
        col_names,
        row_names: label_col.then_some(row_names),
    })
}

/// Writes values with shortest round-trip formatting, optionally under a header.
pub fn write_matrix_csv<W: Write>(out: W, values: &ArrayView2<f64>, col_names: Option<&[String]>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    if let Some(names) = col_names {
        w.write_record(names)?;
    }
    for row in values.rows() {
        w.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

/// `object_id,label` records, both 1-based.
pub fn write_assignments<W: Write>(out: W, partition: &Partition) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["object_id", "label"])?;
    for (i, label) in partition.one_based().iter().enumerate() {
        w.write_record([(i + 1).to_string(), label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct AssignmentRecord {
    object_id: usize,
    label: String,
}

/// Reads `object_id,label` records; ids must cover `1..=q` exactly once.
pub fn read_assignments<R: Read>(input: R) -> Result<Partition> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows: Vec<(usize, String)> = Vec::new();
    for rec in reader.deserialize() {
        let rec: AssignmentRecord = rec?;
        rows.push((rec.object_id, rec.label));
    }
    rows.sort_by_key(|r| r.0);
    for (k, (id, _)) in rows.iter().enumerate() {
        if *id != k + 1 {
            return Err(CobraError::Parse(format!(
                "object ids must run 1..={} without gaps; found {id} at position {}",
                rows.len(),
                k + 1
            )));
        }
    }
    let labels: Vec<String> = rows.into_iter().map(|r| r.1).collect();
    Ok(Partition::from_keys(&labels))
}

/// `row,col` records, 1-based.
pub fn write_mask<W: Write>(out: W, theta: &IndexPairSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col"])?;
    for &(i, j) in theta.pairs() {
        w.write_record([(i + 1).to_string(), (j + 1).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_mask<R: Read>(input: R, p: usize, n: usize) -> Result<IndexPairSet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut pairs = Vec::new();
    for rec in reader.deserialize() {
        let (i, j): (usize, usize) = rec?;
        if i == 0 || j == 0 {
            return Err(CobraError::Parse("mask indices are 1-based".into()));
        }
        pairs.push((i - 1, j - 1));
    }
    IndexPairSet::new(p, n, pairs)
}

/// Weight construction settings echoed into fit exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsMeta {
    pub convention: String,
    pub computed_on: String,
    pub k_cols: usize,
    pub k_rows: usize,
    pub phi: f64,
    pub col_target: f64,
    pub row_target: f64,
    pub bridged: bool,
    pub row_bridges: usize,
    pub col_bridges: usize,
}

impl WeightsMeta {
    /// Settings as resolved by [`build_graphs`](crate::pipeline::build_graphs) for a matrix of `x`'s shape.
    pub fn from_pipeline(x: &DataMatrix, params: &PipelineParams, graphs: &Graphs) -> Self {
        let (p, n) = x.shape();
        let (col_default, row_default) = default_target_sums(p, n);
        Self {
            convention: "knn-gaussian".to_owned(),
            computed_on: "grand-mean centered, unit Frobenius norm".to_owned(),
            k_cols: params.k_cols.min(n.saturating_sub(1)),
            k_rows: params.k_rows.min(p.saturating_sub(1)),
            phi: params.phi,
            col_target: params.col_target.unwrap_or(col_default),
            row_target: params.row_target.unwrap_or(row_default),
            bridged: params.bridge,
            row_bridges: graphs.row_bridges,
            col_bridges: graphs.col_bridges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub presolve_iterations: usize,
    pub row_kkt_residual: f64,
    pub col_kkt_residual: f64,
    pub row_fuse_tol: f64,
    pub col_fuse_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMeanRecord {
    pub row_cluster: usize,
    pub col_cluster: usize,
    pub size: usize,
    pub mean: f64,
}

impl From<BlockMean> for BlockMeanRecord {
    fn from(b: BlockMean) -> Self {
        Self {
            row_cluster: b.row_cluster + 1,
            col_cluster: b.col_cluster + 1,
            size: b.size,
            mean: b.mean,
        }
    }
}

/// JSON export of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema: String,
    pub gamma: f64,
    pub objective: f64,
    pub gap: f64,
    pub converged: bool,
    pub shape: (usize, usize),
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub row_clusters: usize,
    pub col_clusters: usize,
    /// Means of the fitted centroids over each (row cluster, column cluster) block.
    pub bicluster_means: Vec<BlockMeanRecord>,
    pub solver: SolverOptions,
    pub weights: Option<WeightsMeta>,
    pub seed: Option<u64>,
    /// Name of the post-processing that produced the partitions, if any.
    pub refinement: Option<String>,
    pub warm_from: Option<f64>,
    pub diagnostics: Diagnostics,
    /// Fitted centroids, row-major.
    pub u: Vec<Vec<f64>>,
}

impl FitReport {
    pub fn new(x: &DataMatrix, fit: &BiclusterFit, solver: &SolverOptions) -> Self {
        Self::with_partitions(x, fit, solver, fit.row_partition(), fit.col_partition())
    }

    pub fn with_partitions(
        x: &DataMatrix,
        fit: &BiclusterFit,
        solver: &SolverOptions,
        rows: &Partition,
        cols: &Partition,
    ) -> Self {
        Self {
            schema: SCHEMA.to_owned(),
            gamma: fit.gamma,
            objective: fit.objective,
            gap: fit.gap,
            converged: fit.converged,
            shape: x.shape(),
            row_labels: rows.one_based(),
            col_labels: cols.one_based(),
            row_clusters: rows.n_clusters(),
            col_clusters: cols.n_clusters(),
            bicluster_means: block_means(&fit.u.view(), rows, cols).into_iter().map(Into::into).collect(),
            solver: *solver,
            weights: None,
            seed: None,
            refinement: None,
            warm_from: None,
            diagnostics: Diagnostics {
                iterations: fit.iterations,
                presolve_iterations: fit.presolve_iterations,
                row_kkt_residual: fit.rows.kkt_residual,
                col_kkt_residual: fit.cols.kkt_residual,
                row_fuse_tol: fit.rows.fuse_tol,
                col_fuse_tol: fit.cols.fuse_tol,
            },
            u: fit.u.values().rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn row_partition(&self) -> Partition {
        Partition::from_keys(&self.row_labels)
    }

    pub fn col_partition(&self) -> Partition {
        Partition::from_keys(&self.col_labels)
    }

    pub fn u_matrix(&self) -> Result<Array2<f64>> {
        let (p, n) = self.shape;
        let flat: Vec<f64> = self.u.iter().flatten().copied().collect();
        Array2::from_shape_vec((p, n), flat).map_err(|e| CobraError::Parse(format!("centroid table: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: FitReport = serde_json::from_str(text)?;
        if report.schema != SCHEMA {
            return Err(CobraError::Parse(format!("unsupported schema '{}'", report.schema)));
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_round_trip_with_and_without_labels() {
        let text = "a,b,c\n1,2.5,-3\n4,5,6e-3\n";
        let m = read_matrix_csv(text.as_bytes()).unwrap();
        assert_eq!(m.matrix.values(), &array![[1.0, 2.5, -3.0], [4.0, 5.0, 0.006]]);
        assert_eq!(m.col_names.as_deref().unwrap(), &["a", "b", "c"]);
        assert!(m.row_names.is_none());

        let text = "gene,s1,s2\ng1,1,2\ng2,3,4\n";
        let m = read_matrix_csv(text.as_bytes()).unwrap();
        assert_eq!(m.row_names.unwrap(), vec!["g1", "g2"]);
        assert_eq!(m.col_names.unwrap(), vec!["s1", "s2"]);

        let text = ",s1,s2\ng1,1,2\ng2,3,4\n";
        assert_eq!(read_matrix_csv(text.as_bytes()).unwrap().matrix.shape(), (2, 2));

        let x = array![[0.1, 1.0 / 3.0], [-2e-300, 7.0]];
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &x.view(), None).unwrap();
        let back = read_matrix_csv(buf.as_slice()).unwrap();
        assert_eq!(back.matrix.values(), &x);
    }

    #[test]
    fn matrix_errors() {
        assert!(read_matrix_csv("".as_bytes()).is_err());
        assert!(read_matrix_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_matrix_csv("1,2\n3,x\n".as_bytes()).is_err());
        assert!(read_matrix_csv("1,NaN\n3,4\n".as_bytes()).is_err());
    }

    #[test]
    fn assignments_round_trip() {
        let p = Partition::from_keys(&[3, 3, 1, 2, 1]);
        let mut buf = Vec::new();
        write_assignments(&mut buf, &p).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("object_id,label\n1,1\n2,1\n3,2\n"));
        assert_eq!(read_assignments(buf.as_slice()).unwrap(), p);
        assert!(read_assignments("object_id,label\n1,a\n3,b\n".as_bytes()).is_err());
    }

    #[test]
    fn mask_round_trip() {
        let theta = IndexPairSet::new(3, 3, vec![(2, 0), (0, 1)]).unwrap();
        let mut buf = Vec::new();
        write_mask(&mut buf, &theta).unwrap();
        assert_eq!(read_mask(buf.as_slice(), 3, 3).unwrap(), theta);
        assert!(read_mask("row,col\n0,1\n".as_bytes(), 3, 3).is_err());
    }
}
