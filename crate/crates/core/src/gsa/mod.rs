//! Optimal-transport sensitivity indices from given input/output samples.

mod estimator;
mod report;
mod sample;

pub use estimator::{
    bootstrap_ci, dummy_threshold, estimate_index, local_separations, partition, BootstrapCi, Cell,
    CellSeparation, DummyThreshold, EstimatorOptions, IndexEstimate, Solver,
};
pub use report::{analyze_sample, rank_inputs, write_ranking_csv, AnalysisOptions, InputReport, RankRow, SensitivityReport, REPORT_SCHEMA_VERSION};
pub use sample::IoSample;

use thiserror::Error;

use crate::ot::OtError;

/// Fewest sample points allowed in one partition cell.
pub const MIN_CELL_SIZE: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GsaError {
    #[error("shape: {0}")]
    Shape(String),
    #[error("no valid rows")]
    Empty,
    #[error("need at least 2 partitions, got {0}")]
    Partitions(usize),
    #[error("input {input}: cell {cell} has {size} points, need at least {MIN_CELL_SIZE}")]
    CellUnderflow { input: usize, cell: usize, size: usize },
    #[error("outputs have zero variance")]
    ZeroVariance,
    #[error("{0} replicates is too few")]
    Replicates(usize),
    #[error("input index {0} out of range")]
    InputIndex(usize),
    #[error(transparent)]
    Ot(#[from] OtError),
}
