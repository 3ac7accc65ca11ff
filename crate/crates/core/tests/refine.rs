use cobra::pipeline::{run_pipeline, PipelineParams};
use cobra::refine::{adaptive_cobra, thresholded_assign};
use cobra::simulate::{generate_checkerboard, CheckerboardSpec};
use cobra::DataMatrix;
use ndarray::Array2;

fn small_params() -> PipelineParams {
    PipelineParams {
        k_cols: 5,
        k_rows: 5,
        bridge: true,
        grid_size: 10,
        ..PipelineParams::default()
    }
}

#[test]
fn zero_fraction_keeps_partitions() {
    let cb = generate_checkerboard(&CheckerboardSpec::new(14, 12, 2, 3, 0.8, 21)).unwrap();
    let result = run_pipeline(&cb.x, &small_params()).unwrap();
    let (rows, cols) = thresholded_assign(&result.fit, 0.0).unwrap();
    assert_eq!(&rows, result.fit.row_partition());
    assert_eq!(&cols, result.fit.col_partition());

    let (rows1, cols1) = thresholded_assign(&result.fit, 1.0).unwrap();
    assert!(rows1.n_clusters() <= rows.n_clusters());
    assert!(cols1.n_clusters() <= cols.n_clusters());
    assert!(thresholded_assign(&result.fit, 1.5).is_err());
    assert!(thresholded_assign(&result.fit, f64::NAN).is_err());
}

#[test]
fn adaptive_pass_keeps_noiseless_partition() {
    let cb = generate_checkerboard(&CheckerboardSpec::new(16, 16, 2, 2, 0.0, 3)).unwrap();
    let params = small_params();
    let plain = run_pipeline(&cb.x, &params).unwrap();
    let adaptive = adaptive_cobra(&cb.x, &params).unwrap();
    assert_eq!(adaptive.first.fit.row_partition(), plain.fit.row_partition());
    assert_eq!(adaptive.second.fit.row_partition(), plain.fit.row_partition());
    assert_eq!(adaptive.second.fit.col_partition(), plain.fit.col_partition());
}

#[test]
fn constant_matrix_is_one_bicluster() {
    let x = DataMatrix::new(Array2::from_elem((6, 5), 2.5)).unwrap();
    let result = run_pipeline(&x, &small_params()).unwrap();
    assert_eq!(result.gamma_max, 0.0);
    assert_eq!(result.fit.bicluster_count(), 1);
    assert!(result.fit.u.values().iter().all(|&v| (v - 2.5).abs() < 1e-9));
}

#[test]
fn pipeline_is_deterministic() {
    let cb = generate_checkerboard(&CheckerboardSpec::new(10, 12, 2, 2, 1.0, 4)).unwrap();
    let a = run_pipeline(&cb.x, &small_params()).unwrap();
    let b = run_pipeline(&cb.x, &small_params()).unwrap();
    assert_eq!(a.selection.gamma_star, b.selection.gamma_star);
    assert_eq!(a.fit.u.values(), b.fit.u.values());
    assert_eq!(a.holdout, b.holdout);
}

#[test]
fn disconnected_graphs_need_bridging() {
    // two far-apart tight groups with k = 1 give a disconnected nearest-neighbor graph
    let mut v = Array2::zeros((4, 6));
    for j in 0..6 {
        for i in 0..4 {
            v[[i, j]] = if j < 3 { j as f64 * 0.01 + i as f64 } else { 100.0 + j as f64 * 0.01 - i as f64 };
        }
    }
    let x = DataMatrix::new(v).unwrap();
    let params = PipelineParams { k_cols: 1, k_rows: 1, bridge: false, ..small_params() };
    assert!(matches!(
        cobra::pipeline::build_graphs(&x, &params),
        Err(cobra::CobraError::Disconnected { .. })
    ));
    let bridged = cobra::pipeline::build_graphs(&x, &PipelineParams { bridge: true, ..params }).unwrap();
    assert!(bridged.col_bridges > 0);
}
