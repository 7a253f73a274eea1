//! Optimal-transport based global sensitivity analysis, paired with a
//! simplified multi-region direct-air-capture deployment simulator.

pub mod daccs;
pub mod dist;
pub mod doe;
pub mod gsa;
pub mod ot;
pub mod scalar;

pub use scalar::Scalar;

pub type DiscreteMeasureF64 = ot::DiscreteMeasure<f64>;
pub type TransportPlanF64 = ot::TransportPlan<f64>;
pub type GaussianSummaryF64 = ot::GaussianSummary<f64>;
