//! Cluster-ordered SVG heatmaps of a fitted centroid matrix.

use std::fmt::Write as _;

use ndarray::ArrayView2;

use crate::error::{invalid, CobraError, Result};
use crate::matrix::Partition;

const NEGATIVE: (f64, f64, f64) = (33.0, 102.0, 172.0);
const POSITIVE: (f64, f64, f64) = (178.0, 24.0, 43.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapOptions {
    /// Width and height of the whole cell area in pixels.
    pub size: f64,
    pub boundary_width: f64,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        Self {
            size: 600.0,
            boundary_width: 1.5,
        }
    }
}

/// Object indices sorted by label, ties by index.
pub fn display_order(partition: &Partition) -> Vec<usize> {
    let mut order: Vec<usize> = (0..partition.len()).collect();
    order.sort_by_key(|&i| (partition.labels()[i], i));
    order
}

/// Positions in display order where the label changes.
fn boundaries(partition: &Partition, order: &[usize]) -> Vec<usize> {
    let labels = partition.labels();
    (1..order.len())
        .filter(|&k| labels[order[k]] != labels[order[k - 1]])
        .collect()
}

/// Blue below `center`, red above, white at `center`; `half_range` maps to full saturation.
pub fn diverging_color(value: f64, center: f64, half_range: f64) -> String {
    let t = if half_range > 0.0 {
        ((value - center) / half_range).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let end = if t < 0.0 { NEGATIVE } else { POSITIVE };
    let a = t.abs();
    let mix = |c: f64| (255.0 + (c - 255.0) * a).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(end.0), mix(end.1), mix(end.2))
}

/// Renders `u` with rows and columns grouped by cluster and lines between clusters.
pub fn render_svg(u: &ArrayView2<f64>, rows: &Partition, cols: &Partition, opts: &HeatmapOptions) -> Result<String> {
    let (p, n) = u.dim();
    if rows.len() != p || cols.len() != n {
        return Err(CobraError::ShapeMismatch {
            expected: (p, n),
            found: (rows.len(), cols.len()),
        });
    }
    if p == 0 || n == 0 {
        return Err(CobraError::EmptyMatrix);
    }
    if !(opts.size.is_finite() && opts.size > 0.0 && opts.boundary_width >= 0.0) {
        return invalid("heatmap size must be positive");
    }
    let center = u.mean().unwrap_or(0.0);
    let half_range = u.iter().map(|v| (v - center).abs()).fold(0.0, f64::max);
    let row_order = display_order(rows);
    let col_order = display_order(cols);
    let (ch, cw) = (opts.size / p as f64, opts.size / n as f64);

    let mut svg = String::new();
    let s = opts.size;
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(svg, r#"<g class="cells">"#);
    for (r, &i) in row_order.iter().enumerate() {
        for (c, &j) in col_order.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                c as f64 * cw,
                r as f64 * ch,
                cw,
                ch,
                diverging_color(u[[i, j]], center, half_range)
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<g class="boundaries" stroke="black" stroke-width="{}">"#,
        opts.boundary_width
    );
    for k in boundaries(rows, &row_order) {
        let y = k as f64 * ch;
        let _ = writeln!(svg, r#"<line class="h" x1="0" y1="{y:.3}" x2="{s}" y2="{y:.3}"/>"#);
    }
    for k in boundaries(cols, &col_order) {
        let x = k as f64 * cw;
        let _ = writeln!(svg, r#"<line class="v" x1="{x:.3}" y1="0" x2="{x:.3}" y2="{s}"/>"#);
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn color_scale_endpoints() {
        assert_eq!(diverging_color(0.0, 0.0, 1.0), "#ffffff");
        assert_eq!(diverging_color(-1.0, 0.0, 1.0), "#2166ac");
        assert_eq!(diverging_color(5.0, 0.0, 1.0), "#b2182b");
        assert_eq!(diverging_color(3.0, 3.0, 0.0), "#ffffff");
    }

    #[test]
    fn single_block_has_no_lines() {
        let u = Array2::from_elem((3, 4), 2.0);
        let svg = render_svg(
            &u.view(),
            &Partition::single_cluster(3),
            &Partition::single_cluster(4),
            &HeatmapOptions::default(),
        )
        .unwrap();
        assert_eq!(svg.matches("<rect").count(), 12);
        assert_eq!(svg.matches("<line").count(), 0);
        assert_eq!(svg.matches("#ffffff").count(), 12);
    }

    #[test]
    fn ordering_and_shape_checks() {
        let p = Partition::from_keys(&[1, 0, 1, 2, 0]);
        assert_eq!(display_order(&p), vec![0, 2, 1, 4, 3]);
        let u = Array2::zeros((2, 2));
        assert!(render_svg(&u.view(), &Partition::singletons(3), &Partition::singletons(2), &Default::default()).is_err());
    }
}
