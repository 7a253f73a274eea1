//! Forward simulator of DACCS deployment across regions, technologies and
//! five-year steps, with its quantities of interest.

pub mod config;
pub mod formulas;
mod invariants;
pub mod model;
pub mod qoi;
mod world;

pub use config::{DaccsConfig, RegionConfig, ScenarioConfig, ScenarioId, TimePath};
pub use formulas::{
    adjusted_wacc, adjusted_wacc_paths, annuity_factor, block_discount, growth_bound, learning_cost,
    period_growth_rate, subsidy_at, BASE_YEAR,
};
pub use invariants::{check_invariants, Violation};
pub use model::{required_inputs, Finance, Market, Model, Region, SubsidySchedule, TechId, Technology};
pub use qoi::{
    avg_subsidy, qoi_emissions, qoi_policy_gains, qoi_total_subsidies, write_trajectories, Metric,
    PolicyGains, TRAJECTORY_VARIABLES,
};
pub use world::{simulate, step_investment, DacWorld, BOUND_SLACK};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DaccsError {
    #[error("discount base 1 + r must be positive, got r = {0}")]
    NegativeDiscountBase(f64),
    #[error("empty rate path")]
    EmptyPath,
    #[error("config: {0}")]
    Config(String),
    #[error("parameter: {0}")]
    Parameter(String),
    #[error("missing inputs: {}", .0.join(", "))]
    MissingInputs(Vec<String>),
    #[error("step: {0}")]
    Step(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("worlds are not comparable: {0}")]
    Mismatch(String),
    #[error("io: {0}")]
    Io(String),
}
