//! Design of experiment: sample matrices, balanced clustering against Sobol
//! centroids, and greedy nearest-neighbour run ordering.

mod layout;
mod sample;

pub use layout::{cluster_balanced, order_cluster, ExperimentLayout};
pub use sample::SampleMatrix;

use crate::dist::DistError;
use crate::ot::OtError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DoeError {
    #[error("{n} samples cannot be split into {clusters} equal clusters")]
    Divisibility { n: usize, clusters: usize },
    #[error("sample matrix shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Ot(#[from] OtError),
    #[error("layout: {0}")]
    Layout(String),
}
