//! Convex biclustering.
//!
//! Minimizes `1/2 ||X - U||_F^2 + gamma * (Omega_W(U) + Omega_W~(U^T))`, where the
//! two penalties fuse columns and rows of `U` over sparse weight graphs, by
//! alternating row and column convex-clustering proxes with Dykstra-like
//! corrections.

pub mod biclust;
pub mod error;
pub mod heatmap;
pub mod io;
mod joint;
pub mod matrix;
pub mod metrics;
pub mod pipeline;
pub mod prox;
pub mod refine;
pub mod select;
pub mod simulate;
pub mod weights;

pub use error::{CobraError, Result};
pub use matrix::{
    center_grand_mean, frobenius_distance, grand_mean, CentroidMatrix, DataMatrix, IndexPairSet,
    Partition, RngSeed,
};
pub use weights::{Axis, Edge, WeightParams, WeightedGraph};
