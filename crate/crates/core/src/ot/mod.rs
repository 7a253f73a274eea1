//! Discrete optimal transport: exact and entropic solvers, the Gaussian
//! (Wasserstein-Bures) closed form, and the balanced assignment used for
//! experiment clustering. The ground cost is always squared Euclidean.

mod assignment;
mod bures;
mod exact;
pub mod linalg;
mod measure;
mod network_simplex;
mod sinkhorn;

pub use assignment::{solve_balanced_assignment, BalancedAssignment};
pub use bures::{empirical_summary, wasserstein_bures, GaussianSummary, WbTerms};
pub use exact::{solve_exact, solve_exact_1d, solve_exact_with_cost};
pub use measure::{squared_euclidean_cost, DiscreteMeasure, TransportPlan};
pub use sinkhorn::{solve_sinkhorn, solve_sinkhorn_traced, SinkhornOptions};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OtError {
    #[error("measure has no atoms")]
    Empty,
    #[error("points must have dimension >= 1")]
    ZeroDimension,
    #[error("{points} coordinates do not form {weights} points of dimension {dim}")]
    ShapeMismatch {
        points: usize,
        dim: usize,
        weights: usize,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("weights must be finite and non-negative, got {0}")]
    InvalidWeight(f64),
    #[error("weights sum to {0}, expected 1")]
    MassNotOne(f64),
    #[error("non-finite coordinate or ground cost")]
    NonFinite,
    #[error("cost matrix has {got} entries, expected {expected}")]
    CostShape { got: usize, expected: usize },
    #[error("network simplex exceeded {0} pivots")]
    PivotLimit(usize),
    #[error("transport problem is unbounded")]
    Unbounded,
    #[error("transport problem is infeasible")]
    Infeasible,
    #[error("sinkhorn did not converge in {iterations} iterations (marginal error {error})")]
    NotConverged { iterations: usize, error: f64 },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("covariance is not positive semi-definite (min eigenvalue {0})")]
    NotPsd(f64),
    #[error("{points} points cannot fill {centroids} centroids of capacity {capacity}")]
    Cardinality {
        points: usize,
        centroids: usize,
        capacity: usize,
    },
}
