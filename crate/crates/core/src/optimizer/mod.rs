//! Exact solution of the channel-hopping problem on small instances.
//!
//! [`solve_exact`] is a depth-first branch and bound; [`enumerate_oracle`]
//! brute-forces the same problem and serves as ground truth in tests.

mod generate;
mod oracle;
mod solver;

pub use generate::{random_scenario, InstanceLimits};
pub use oracle::{enumerate_oracle, enumerate_oracle_with_cap, state_count, DEFAULT_STATE_CAP};
pub use solver::solve_exact;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{ConstraintFamily, ProblemError, Schedule};

/// Default objective weights: collisions dominate, hops are a tie-breaker.
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schedule: Schedule,
    pub objective_value: f64,
    pub nodes_explored: u64,
    pub proven_optimal: bool,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("infeasible ({family} constraints bind): {detail}")]
    Infeasible {
        family: ConstraintFamily,
        detail: String,
    },
    #[error("budget exhausted after {nodes_explored} expansions without a feasible schedule")]
    BudgetExhausted { nodes_explored: u64 },
    #[error("instance too large: {trajectories} trajectories per node (limit {limit})")]
    TooLarge { trajectories: u64, limit: u64 },
    #[error("enumeration would visit about {estimate:.3e} states, cap is {cap}")]
    CapExceeded { estimate: f64, cap: u64 },
}
