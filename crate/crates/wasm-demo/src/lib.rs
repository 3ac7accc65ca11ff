//! WebAssembly bindings for the demo page in `www/`.
//!
//! [`Session`] holds plain Rust state and is what the native tests exercise;
//! [`Demo`] wraps it for JavaScript.

use wasm_bindgen::prelude::*;

use cobra::biclust::{cobra_fit, default_gamma_grid, solution_path, BiclustProblem, BiclusterFit, SolverOptions};
use cobra::heatmap::{render_svg, HeatmapOptions};
use cobra::metrics::{bicluster_flatten, compare};
use cobra::pipeline::{build_graphs, gamma_max, Graphs, PipelineParams};
use cobra::simulate::{generate_checkerboard, Checkerboard, CheckerboardSpec};
use cobra::Partition;

const SVG_SIZE: f64 = 360.0;

pub struct Session {
    data: Checkerboard,
    params: PipelineParams,
    graphs: Graphs,
    gamma_max: f64,
    last_fit: Option<BiclusterFit>,
}

impl Session {
    pub fn new(rows: usize, cols: usize, row_groups: usize, col_groups: usize, sigma: f64, seed: u64) -> cobra::Result<Self> {
        let data = generate_checkerboard(&CheckerboardSpec::new(rows, cols, row_groups, col_groups, sigma, seed))?;
        let params = PipelineParams {
            k_cols: 5,
            k_rows: 5,
            bridge: true,
            ..PipelineParams::default()
        };
        let graphs = build_graphs(&data.x, &params)?;
        let gamma_max = gamma_max(&data.x, &graphs, &params)?;
        Ok(Self {
            data,
            params,
            graphs,
            gamma_max,
            last_fit: None,
        })
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    /// The raw matrix, ordered by the true groups.
    pub fn data_svg(&self) -> cobra::Result<String> {
        let opts = HeatmapOptions {
            size: SVG_SIZE,
            ..HeatmapOptions::default()
        };
        render_svg(&self.data.x.view(), &self.data.row_truth, &self.data.col_truth, &opts)
    }

    /// Fits at `fraction * gamma_max` and draws the centroids by fitted cluster.
    pub fn fit_svg(&mut self, fraction: f64) -> cobra::Result<String> {
        let fit = cobra_fit(
            &BiclustProblem {
                x: &self.data.x,
                col_graph: &self.graphs.cols,
                row_graph: &self.graphs.rows,
                gamma: fraction * self.gamma_max,
            },
            &SolverOptions::default(),
            None,
        )?;
        let opts = HeatmapOptions {
            size: SVG_SIZE,
            ..HeatmapOptions::default()
        };
        let svg = render_svg(&fit.u.view(), fit.row_partition(), fit.col_partition(), &opts)?;
        self.last_fit = Some(fit);
        Ok(svg)
    }

    /// Row clusters, column clusters, and the adjusted Rand index against the truth.
    pub fn last_summary(&self) -> Option<(usize, usize, f64)> {
        let fit = self.last_fit.as_ref()?;
        let truth: Partition = bicluster_flatten(&self.data.row_truth, &self.data.col_truth);
        let ari = compare(&fit.bicluster_partition(), &truth).ok()?.ari;
        Some((fit.row_partition().n_clusters(), fit.col_partition().n_clusters(), ari))
    }

    /// Bicluster counts along a warm-started path of `points` levels up to `gamma_max`.
    pub fn path_counts(&self, points: usize) -> cobra::Result<Vec<u32>> {
        let grid = default_gamma_grid(self.gamma_max.max(f64::MIN_POSITIVE), points)?;
        let path = solution_path(&self.data.x, &self.graphs.rows, &self.graphs.cols, &grid, &self.params.solver)?;
        Ok(path.bicluster_counts().into_iter().map(|c| c as u32).collect())
    }
}

fn js_err(e: cobra::CobraError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    session: Session,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(rows: usize, cols: usize, row_groups: usize, col_groups: usize, sigma: f64, seed: u32) -> Result<Demo, JsError> {
        let session = Session::new(rows, cols, row_groups, col_groups, sigma, seed.into()).map_err(js_err)?;
        Ok(Demo { session })
    }

    #[wasm_bindgen(js_name = gammaMax)]
    pub fn gamma_max(&self) -> f64 {
        self.session.gamma_max()
    }

    #[wasm_bindgen(js_name = dataSvg)]
    pub fn data_svg(&self) -> Result<String, JsError> {
        self.session.data_svg().map_err(js_err)
    }

    #[wasm_bindgen(js_name = fitSvg)]
    pub fn fit_svg(&mut self, fraction: f64) -> Result<String, JsError> {
        self.session.fit_svg(fraction).map_err(js_err)
    }

    /// `[row clusters, column clusters, ARI]`, empty before the first fit.
    #[wasm_bindgen(js_name = lastSummary)]
    pub fn last_summary(&self) -> Vec<f64> {
        self.session
            .last_summary()
            .map(|(r, c, ari)| vec![r as f64, c as f64, ari])
            .unwrap_or_default()
    }

    #[wasm_bindgen(js_name = pathCounts)]
    pub fn path_counts(&self, points: usize) -> Result<Vec<u32>, JsError> {
        self.session.path_counts(points).map_err(js_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_round_trip() {
        let mut s = Session::new(16, 20, 2, 3, 0.0, 1).unwrap();
        assert!(s.gamma_max() > 0.0);
        assert!(s.data_svg().unwrap().starts_with("<svg"));
        assert!(s.last_summary().is_none());
        let svg = s.fit_svg(0.01).unwrap();
        let (r, c, ari) = s.last_summary().unwrap();
        assert_eq!(svg.matches(r#"class="h""#).count(), r - 1);
        assert_eq!(svg.matches(r#"class="v""#).count(), c - 1);
        // columns of one true group that borrow neighbours from smaller groups
        // are pulled apart at small gamma, so recovery is close but not exact
        assert_eq!(r, 2);
        assert!(ari > 0.95, "{ari}");
        let counts = s.path_counts(5).unwrap();
        assert_eq!(counts.len(), 5);
        // noiseless data: at gamma = 0 identical rows and columns already coincide
        assert_eq!(counts[0], 2 * 3);
        assert_eq!(*counts.last().unwrap(), 1);
    }

    #[test]
    fn bad_shapes_are_errors() {
        assert!(Session::new(2, 2, 3, 1, 0.0, 0).is_err());
    }
}
