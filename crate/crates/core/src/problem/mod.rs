//! Domain model of the channel-hopping problem.
//!
//! A [`Scenario`] fixes nodes, gateways, carriers, capacities and demands;
//! a [`Schedule`] holds the decision tensors. The functions in this module
//! are pure: they score a schedule (collisions, hops, weighted objective)
//! and list every violated constraint family.

mod eval;
mod scenario;
mod schedule;

pub use eval::{
    collision_count, hop_count, objective, validate, ConstraintFamily, Violation, ViolationSite,
};
pub(crate) use eval::check_weights;
pub use scenario::{Dims, Scenario};
pub use schedule::Schedule;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("objective weights must be finite and non-negative (alpha={alpha}, beta={beta})")]
    InvalidWeights { alpha: f64, beta: f64 },
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
}
