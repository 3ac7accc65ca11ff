//! Sparse Gaussian-kernel k-nearest-neighbor weight graphs over rows or columns.

use std::io::{Read, Write};

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CobraError, Result};
use crate::matrix::{DataMatrix, Partition};

/// Which objects of the data matrix a graph connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Columns,
    Rows,
}

impl Axis {
    pub fn object_count(self, x: &DataMatrix) -> usize {
        match self {
            Axis::Columns => x.ncols(),
            Axis::Rows => x.nrows(),
        }
    }

    fn object<'a>(self, x: &'a DataMatrix, i: usize) -> ArrayView1<'a, f64> {
        match self {
            Axis::Columns => x.values().column(i),
            Axis::Rows => x.values().row(i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected graph with strictly positive edge weights, edges sorted by `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if node_count == 0 {
            return invalid("graph needs at least one node");
        }
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| if e.i > e.j { Edge { i: e.j, j: e.i, w: e.w } } else { e })
            .collect();
        for e in &edges {
            if e.i == e.j {
                return invalid(format!("self loop on node {}", e.i));
            }
            if e.j >= node_count {
                return invalid(format!("edge ({}, {}) exceeds node count {node_count}", e.i, e.j));
            }
            if !(e.w.is_finite() && e.w > 0.0) {
                return invalid(format!("edge ({}, {}) has non-positive weight {}", e.i, e.j, e.w));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if edges.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return invalid("duplicate edge");
        }
        Ok(Self { node_count, edges })
    }

    /// All pairs joined with the same weight.
    pub fn complete(node_count: usize, weight: f64) -> Result<Self> {
        let edges = (0..node_count)
            .flat_map(|i| (i + 1..node_count).map(move |j| Edge { i, j, w: weight }));
        Self::new(node_count, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Unweighted degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Rescales weights to sum to `target`.
    pub fn normalized(&self, target: f64) -> Result<Self> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(CobraError::ZeroWeights);
        }
        let scale = target / total;
        Ok(Self {
            node_count: self.node_count,
            edges: self
                .edges
                .iter()
                .map(|e| Edge { w: e.w * scale, ..*e })
                .collect(),
        })
    }

    /// Connected components restricted to the edges accepted by `keep`.
    pub fn components_where(&self, mut keep: impl FnMut(usize, &Edge) -> bool) -> Partition {
        let mut uf = UnionFind::new(self.node_count);
        for (l, e) in self.edges.iter().enumerate() {
            if keep(l, e) {
                uf.union(e.i, e.j);
            }
        }
        uf.partition()
    }

    pub fn components(&self) -> Partition {
        self.components_where(|_, _| true)
    }

    /// Same graph with node `k` renamed to `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        Self::new(
            self.node_count,
            self.edges.iter().map(|e| Edge {
                i: perm[e.i],
                j: perm[e.j],
                w: e.w,
            }),
        )
    }

    /// Edge-list CSV with header `i,j,w`, 1-based indices and 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["i", "j", "w"])?;
        for e in &self.edges {
            wtr.write_record([
                (e.i + 1).to_string(),
                (e.j + 1).to_string(),
                format!("{:.16e}", e.w),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, node_count: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut edges = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(CobraError::Parse(format!("expected 3 fields, got {}", rec.len())));
            }
            let parse_idx = |s: &str| -> Result<usize> {
                let v: usize = s
                    .trim()
                    .parse()
                    .map_err(|_| CobraError::Parse(format!("bad index {s:?}")))?;
                v.checked_sub(1)
                    .ok_or_else(|| CobraError::Parse("indices are 1-based".into()))
            };
            let w: f64 = rec[2]
                .trim()
                .parse()
                .map_err(|_| CobraError::Parse(format!("bad weight {:?}", &rec[2])))?;
            edges.push(Edge {
                i: parse_idx(&rec[0])?,
                j: parse_idx(&rec[1])?,
                w,
            });
        }
        Self::new(node_count, edges)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    pub(crate) fn partition(&mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|i| self.find(i)).collect();
        Partition::from_keys(&roots)
    }
}

/// Parameters of the k-NN Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub k: usize,
    pub phi: f64,
    pub target_sum: f64,
}

impl WeightParams {
    pub fn new(k: usize, phi: f64, target_sum: f64) -> Result<Self> {
        if k == 0 {
            return invalid("k must be at least 1");
        }
        if !(phi.is_finite() && phi >= 0.0) {
            return invalid("phi must be finite and nonnegative");
        }
        if !(target_sum.is_finite() && target_sum > 0.0) {
            return invalid("target_sum must be positive");
        }
        Ok(Self { k, phi, target_sum })
    }
}

/// Column weights sum to `1/sqrt(p)`, row weights to `1/sqrt(n)`.
pub fn default_target_sums(p: usize, n: usize) -> (f64, f64) {
    (1.0 / (p as f64).sqrt(), 1.0 / (n as f64).sqrt())
}

pub(crate) fn pairwise_sq_distances(x: &DataMatrix, axis: Axis) -> Vec<Vec<f64>> {
    let q = axis.object_count(x);
    let mut d = vec![vec![0.0; q]; q];
    for i in 0..q {
        let a = axis.object(x, i);
        for j in i + 1..q {
            let b = axis.object(x, j);
            let s: f64 = a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum();
            d[i][j] = s;
            d[j][i] = s;
        }
    }
    d
}

/// k-NN mask (mutual-OR) times `exp(-phi d^2)`, normalized to `params.target_sum`.
///
/// Neighbors are ranked by distance with ties going to the lower index.
/// Pre-weights are evaluated relative to the smallest retained distance, which
/// leaves the normalized weights unchanged while avoiding underflow of the
/// whole kernel when distances are large.
pub fn knn_gaussian_weights(
    x: &DataMatrix,
    axis: Axis,
    params: &WeightParams,
) -> Result<WeightedGraph> {
    let params = WeightParams::new(params.k, params.phi, params.target_sum)?;
    let q = axis.object_count(x);
    if params.k >= q {
        return invalid(format!("k = {} must be smaller than the {q} objects", params.k));
    }
    let d2 = pairwise_sq_distances(x, axis);
    let mut mask = vec![vec![false; q]; q];
    let mut order: Vec<usize> = Vec::with_capacity(q);
    for i in 0..q {
        order.clear();
        order.extend((0..q).filter(|&j| j != i));
        order.sort_by(|&a, &b| d2[i][a].total_cmp(&d2[i][b]).then(a.cmp(&b)));
        for &j in order.iter().take(params.k) {
            mask[i][j] = true;
            mask[j][i] = true;
        }
    }
    let pairs: Vec<(usize, usize)> = (0..q)
        .flat_map(|i| (i + 1..q).map(move |j| (i, j)))
        .filter(|&(i, j)| mask[i][j])
        .collect();
    let shift = pairs
        .iter()
        .map(|&(i, j)| d2[i][j])
        .fold(f64::INFINITY, f64::min);
    let edges: Vec<Edge> = pairs
        .iter()
        .map(|&(i, j)| Edge {
            i,
            j,
            w: (-params.phi * (d2[i][j] - shift)).exp(),
        })
        .filter(|e| e.w > 0.0)
        .collect();
    if edges.is_empty() {
        return Err(CobraError::ZeroWeights);
    }
    WeightedGraph::new(q, edges)?.normalized(params.target_sum)
}

pub fn is_connected(g: &WeightedGraph) -> bool {
    g.components().n_clusters() == 1
}

/// Joins the components of `g` with a minimum spanning tree over components.
///
/// The distance between two components is their closest pair of objects; each
/// bridge gets the smallest existing edge weight, and the result is rescaled to
/// the original total weight.
pub fn bridge_components(g: &WeightedGraph, x: &DataMatrix, axis: Axis) -> Result<WeightedGraph> {
    let q = g.node_count();
    if axis.object_count(x) != q {
        return invalid("graph node count does not match the matrix axis");
    }
    let comps = g.components();
    let c = comps.n_clusters();
    if c <= 1 {
        return Ok(g.clone());
    }
    let d2 = pairwise_sq_distances(x, axis);
    let labels = comps.labels();
    // closest pair between every pair of components
    let mut best: Vec<Option<(f64, usize, usize)>> = vec![None; c * c];
    for i in 0..q {
        for j in i + 1..q {
            let (a, b) = (labels[i], labels[j]);
            if a == b {
                continue;
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            let slot = &mut best[a * c + b];
            if slot.is_none_or(|(d, _, _)| d2[i][j] < d) {
                *slot = Some((d2[i][j], i, j));
            }
        }
    }
    let mut candidates: Vec<(f64, usize, usize, usize, usize)> = Vec::new();
    for a in 0..c {
        for b in a + 1..c {
            if let Some((d, i, j)) = best[a * c + b] {
                candidates.push((d, a, b, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.3, x.4).cmp(&(y.3, y.4))));
    let bridge_w = g
        .edges()
        .iter()
        .map(|e| e.w)
        .fold(f64::INFINITY, f64::min);
    let bridge_w = if bridge_w.is_finite() { bridge_w } else { 1.0 };
    let mut uf = UnionFind::new(c);
    let mut edges = g.edges().to_vec();
    for (_, a, b, i, j) in candidates {
        if uf.union(a, b) {
            edges.push(Edge { i, j, w: bridge_w });
        }
    }
    let bridged = WeightedGraph::new(q, edges)?;
    let target = if g.total_weight() > 0.0 {
        g.total_weight()
    } else {
        bridged.total_weight()
    };
    bridged.normalized(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand_distr::{Distribution, StandardNormal};

    use crate::matrix::RngSeed;

    fn random_matrix(p: usize, n: usize, seed: u64) -> DataMatrix {
        let mut rng = RngSeed(seed).rng();
        DataMatrix::new(Array2::from_shape_simple_fn((p, n), || {
            StandardNormal.sample(&mut rng)
        }))
        .unwrap()
    }

    /// Exhaustive oracle: sort every other column by distance, apply the formula directly.
    fn brute_force_weights(x: &DataMatrix, k: usize, phi: f64, target: f64) -> Vec<(usize, usize, f64)> {
        let n = x.ncols();
        let dist = |i: usize, j: usize| -> f64 {
            (0..x.nrows())
                .map(|r| (x.values()[[r, i]] - x.values()[[r, j]]).powi(2))
                .sum()
        };
        let neighbors = |i: usize| -> Vec<usize> {
            let mut others: Vec<(f64, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
            others.sort_by(|a, b| a.partial_cmp(b).unwrap());
            others.into_iter().take(k).map(|(_, j)| j).collect()
        };
        let mut raw = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if neighbors(i).contains(&j) || neighbors(j).contains(&i) {
                    raw.push((i, j, (-phi * dist(i, j)).exp()));
                }
            }
        }
        let total: f64 = raw.iter().map(|r| r.2).sum();
        raw.into_iter().map(|(i, j, w)| (i, j, w * target / total)).collect()
    }

    #[test]
    fn two_nodes_single_edge() {
        let x = DataMatrix::new(array![[0.0, 5.0]]).unwrap();
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(1, 0.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(g.edges(), &[Edge { i: 0, j: 1, w: 1.0 }]);
    }

    #[test]
    fn uniform_kernel_gives_complete_graph() {
        let x = random_matrix(3, 6, 1);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(5, 0.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(g.edge_count(), 15);
        for e in g.edges() {
            assert!((e.w - 2.0 / 30.0).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_brute_force_oracle() {
        let x = random_matrix(3, 5, 11);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(2, 0.5, 1.0).unwrap())
            .unwrap();
        let oracle = brute_force_weights(&x, 2, 0.5, 1.0);
        assert_eq!(g.edge_count(), oracle.len());
        for (e, (i, j, w)) in g.edges().iter().zip(oracle) {
            assert_eq!((e.i, e.j), (i, j));
            assert!((e.w - w).abs() <= 1e-14 * w.max(1e-300), "{} vs {}", e.w, w);
        }
    }

    #[test]
    fn rows_axis_uses_rows() {
        let x = random_matrix(6, 3, 5);
        let g_rows = knn_gaussian_weights(&x, Axis::Rows, &WeightParams::new(2, 0.5, 0.7).unwrap())
            .unwrap();
        let g_t = knn_gaussian_weights(
            &x.transpose(),
            Axis::Columns,
            &WeightParams::new(2, 0.5, 0.7).unwrap(),
        )
        .unwrap();
        assert_eq!(g_rows, g_t);
    }

    #[test]
    fn rejects_k_too_large() {
        let x = random_matrix(2, 4, 3);
        let err = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(4, 0.5, 1.0).unwrap());
        assert!(matches!(err, Err(CobraError::InvalidParameter(_))));
    }

    #[test]
    fn target_sums() {
        assert_eq!(default_target_sums(4, 9), (0.5, 1.0 / 3.0));
        assert_eq!(default_target_sums(1, 1), (1.0, 1.0));
        let (c, r) = default_target_sums(500, 56);
        assert_eq!(c, 1.0 / 500f64.sqrt());
        assert_eq!(r, 1.0 / 56f64.sqrt());
    }

    #[test]
    fn connectivity() {
        let path = WeightedGraph::new(3, [Edge { i: 0, j: 1, w: 1.0 }, Edge { i: 1, j: 2, w: 1.0 }])
            .unwrap();
        assert!(is_connected(&path));
        let split = WeightedGraph::new(4, [Edge { i: 0, j: 1, w: 1.0 }, Edge { i: 2, j: 3, w: 1.0 }])
            .unwrap();
        assert!(!is_connected(&split));
    }

    fn blobs(centers: &[f64], per: usize, seed: u64) -> DataMatrix {
        let mut rng = RngSeed(seed).rng();
        let n = centers.len() * per;
        let mut v = Array2::zeros((2, n));
        for (b, &c) in centers.iter().enumerate() {
            for k in 0..per {
                for r in 0..2 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v[[r, b * per + k]] = c + 0.1 * z;
                }
            }
        }
        DataMatrix::new(v).unwrap()
    }

    #[test]
    fn blob_connectivity_matches_union_find() {
        let x = blobs(&[0.0, 50.0], 6, 2);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(2, 0.5, 1.0).unwrap())
            .unwrap();
        // oracle: union-find directly over the edge list
        let mut parent: Vec<usize> = (0..12).collect();
        fn root(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        for e in g.edges() {
            let (a, b) = (root(&mut parent, e.i), root(&mut parent, e.j));
            parent[a] = b;
        }
        let roots: std::collections::HashSet<usize> =
            (0..12).map(|i| root(&mut parent, i)).collect();
        assert_eq!(is_connected(&g), roots.len() == 1);
        assert!(!is_connected(&g));
    }

    #[test]
    fn bridging_connected_is_identity() {
        let x = random_matrix(3, 6, 9);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(5, 0.5, 1.0).unwrap())
            .unwrap();
        let b = bridge_components(&g, &x, Axis::Columns).unwrap();
        assert_eq!(b.edge_count(), g.edge_count());
        for (e, f) in g.edges().iter().zip(b.edges()) {
            assert!((e.w - f.w).abs() < 1e-15);
        }
    }

    #[test]
    fn bridging_two_components_adds_one_edge() {
        let x = blobs(&[0.0, 50.0], 6, 4);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(2, 0.5, 1.0).unwrap())
            .unwrap();
        let b = bridge_components(&g, &x, Axis::Columns).unwrap();
        assert_eq!(b.edge_count(), g.edge_count() + 1);
        assert!(is_connected(&b));
        assert!((b.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bridges_follow_component_mst() {
        let x = blobs(&[0.0, 10.0, 40.0], 5, 8);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(2, 0.5, 1.0).unwrap())
            .unwrap();
        let comps = g.components();
        assert_eq!(comps.n_clusters(), 3);
        let b = bridge_components(&g, &x, Axis::Columns).unwrap();
        let added: Vec<(usize, usize)> = b
            .edges()
            .iter()
            .map(|e| (e.i, e.j))
            .filter(|ij| !g.edges().iter().any(|e| (e.i, e.j) == *ij))
            .collect();
        // oracle: Prim's algorithm on the 3x3 component distance matrix
        let d = |i: usize, j: usize| -> f64 {
            (0..2).map(|r| (x.values()[[r, i]] - x.values()[[r, j]]).powi(2)).sum()
        };
        let mut closest = vec![vec![(f64::INFINITY, 0, 0); 3]; 3];
        for i in 0..15 {
            for j in 0..15 {
                let (a, b) = (comps.labels()[i], comps.labels()[j]);
                if a != b && d(i, j) < closest[a][b].0 {
                    closest[a][b] = (d(i, j), i.min(j), i.max(j));
                }
            }
        }
        let mut in_tree = [true, false, false];
        let mut expected = Vec::new();
        for _ in 0..2 {
            let mut pick = (f64::INFINITY, 0, 0, 0);
            for a in 0..3 {
                for b in 0..3 {
                    if in_tree[a] && !in_tree[b] && closest[a][b].0 < pick.0 {
                        pick = (closest[a][b].0, b, closest[a][b].1, closest[a][b].2);
                    }
                }
            }
            in_tree[pick.1] = true;
            expected.push((pick.2, pick.3));
        }
        expected.sort();
        let mut added = added;
        added.sort();
        assert_eq!(added, expected);
        assert!(is_connected(&b));
    }

    #[test]
    fn edge_csv_round_trip() {
        let x = random_matrix(4, 7, 21);
        let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(3, 0.5, 0.5).unwrap())
            .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = WeightedGraph::read_csv(buf.as_slice(), 7).unwrap();
        assert_eq!(back, g);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn weights_normalize_and_respect_kernel(seed in 0u64..10_000, k in 1usize..5, target in 0.1f64..3.0) {
                let x = random_matrix(3, 8, seed);
                let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(k, 0.5, target).unwrap()).unwrap();
                prop_assert!((g.total_weight() - target).abs() <= 1e-12 * target);
                let d2 = pairwise_sq_distances(&x, Axis::Columns);
                for a in g.edges() {
                    for b in g.edges() {
                        if d2[a.i][a.j] < d2[b.i][b.j] {
                            prop_assert!(a.w > b.w);
                        }
                    }
                }
            }

            #[test]
            fn permutation_round_trip(seed in 0u64..10_000) {
                let x = random_matrix(7, 3, seed);
                let params = WeightParams::new(3, 0.5, 1.0).unwrap();
                let g = knn_gaussian_weights(&x, Axis::Rows, &params).unwrap();
                // reverse the rows, rebuild, map back
                let perm: Vec<usize> = (0..7).rev().collect();
                let permuted = DataMatrix::new(x.values().select(ndarray::Axis(0), &perm)).unwrap();
                let gp = knn_gaussian_weights(&permuted, Axis::Rows, &params).unwrap();
                let back = gp.relabeled(&perm).unwrap();
                prop_assert_eq!(back.edge_count(), g.edge_count());
                for (e, f) in g.edges().iter().zip(back.edges()) {
                    prop_assert_eq!((e.i, e.j), (f.i, f.j));
                    prop_assert!((e.w - f.w).abs() <= 1e-12 * e.w);
                }
            }

            #[test]
            fn bridging_always_connects(seed in 0u64..10_000) {
                let x = random_matrix(2, 12, seed);
                let g = knn_gaussian_weights(&x, Axis::Columns, &WeightParams::new(1, 0.5, 1.0).unwrap()).unwrap();
                let b = bridge_components(&g, &x, Axis::Columns).unwrap();
                prop_assert!(is_connected(&b));
                prop_assert!((b.total_weight() - 1.0).abs() < 1e-12);
            }
        }
    }
}
