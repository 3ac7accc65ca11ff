use cobra::biclust::{cobra_fit, BiclustProblem, SolverOptions};
use cobra::heatmap::{render_svg, HeatmapOptions};
use cobra::io::{read_matrix_csv, write_matrix_csv, FitReport, SCHEMA};
use cobra::simulate::{generate_checkerboard, CheckerboardSpec};
use cobra::{DataMatrix, Partition, WeightedGraph};
use ndarray::array;

fn four_block() -> (ndarray::Array2<f64>, Partition, Partition) {
    let u = array![
        [1.0, -2.0, 1.0, -2.0, -2.0],
        [3.0, 0.5, 3.0, 0.5, 0.5],
        [1.0, -2.0, 1.0, -2.0, -2.0],
        [3.0, 0.5, 3.0, 0.5, 0.5],
    ];
    (u, Partition::from_keys(&[0, 1, 0, 1]), Partition::from_keys(&[0, 1, 0, 1, 1]))
}

#[test]
fn heatmap_matches_golden_file() {
    let (u, rows, cols) = four_block();
    let opts = HeatmapOptions { size: 100.0, boundary_width: 1.0 };
    let svg = render_svg(&u.view(), &rows, &cols, &opts).unwrap();
    let golden = include_str!("golden/four_block.svg");
    assert_eq!(svg, golden);
}

#[test]
fn heatmap_boundary_counts() {
    let cb = generate_checkerboard(&CheckerboardSpec::new(12, 15, 3, 4, 0.0, 5)).unwrap();
    let svg = render_svg(&cb.x.view(), &cb.row_truth, &cb.col_truth, &HeatmapOptions::default()).unwrap();
    assert_eq!(svg.matches(r#"class="h""#).count(), 2);
    assert_eq!(svg.matches(r#"class="v""#).count(), 3);
    assert_eq!(svg.matches("<rect").count(), 180);
}

#[test]
fn fit_report_round_trips() {
    let x = DataMatrix::new(array![[0.0, 2.0, 2.1], [0.2, 2.2, 1.9], [5.0, 5.1, 4.9]]).unwrap();
    let rg = WeightedGraph::complete(3, 0.3).unwrap();
    let cg = WeightedGraph::complete(3, 0.3).unwrap();
    let opts = SolverOptions::default();
    let fit = cobra_fit(&BiclustProblem { x: &x, col_graph: &cg, row_graph: &rg, gamma: 0.4 }, &opts, None).unwrap();
    let report = FitReport::new(&x, &fit, &opts);
    let text = report.to_json().unwrap();
    assert!(text.contains(r#""schema": "cobra/1""#));
    let back = FitReport::from_json(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.schema, SCHEMA);
    assert_eq!(&back.row_partition(), fit.row_partition());
    assert_eq!(&back.col_partition(), fit.col_partition());
    assert_eq!(&back.u_matrix().unwrap(), fit.u.values());
    assert!(back.row_labels.iter().all(|&l| l >= 1));
    let sizes: usize = back.bicluster_means.iter().map(|b| b.size).sum();
    assert_eq!(sizes, 9);

    let wrong = text.replace("cobra/1", "cobra/0");
    assert!(FitReport::from_json(&wrong).is_err());
}

#[test]
fn centroid_csv_round_trips_exactly() {
    let cb = generate_checkerboard(&CheckerboardSpec::new(6, 5, 2, 2, 1.3, 9)).unwrap();
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &cb.x.view(), Some(&["a", "b", "c", "d", "e"].map(String::from))).unwrap();
    let back = read_matrix_csv(buf.as_slice()).unwrap();
    assert_eq!(back.matrix.values(), cb.x.values());
    assert_eq!(back.col_names.unwrap().len(), 5);
}
