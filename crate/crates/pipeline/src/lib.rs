//! Batch runner for the DACCS sensitivity pipeline: sampling, layout,
//! resumable parallel simulation, analysis and plot tables.

pub mod analyze;
pub mod config;
pub mod plotdata;
pub mod records;
pub mod runner;

pub use analyze::{analyze, AnalysisSummary, Qoi};
pub use config::{ExperimentConfig, Inputs};
pub use plotdata::emit_plot_data;
pub use records::{RunRecord, RunStatus};
pub use runner::{build_layout, build_samples, run_experiment, RunSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Data(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
}

impl PipelineError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Analysis(_) => 4,
            Self::Io { .. } | Self::Data(_) => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
