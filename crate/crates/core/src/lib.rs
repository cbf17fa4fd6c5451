//! # lorahop
//!
//! Toolkit for LoRa channel hopping at desk scale:
//!
//! - [`problem`]: scenario/schedule model, collision and hop objectives,
//!   constraint validation.
//! - [`optimizer`]: exact branch-and-bound solver plus an exhaustive oracle.
//! - [`sim`]: trace-driven multi-node transmission replay with pluggable
//!   hopping strategies and capture-effect collision resolution.
//! - [`telemetry`]: sliding telemetry windows and labelled dataset generation.
//! - [`predictor`]: a small dense network (two hidden layers of ten units,
//!   softmax head) trained with Adam, with compact binary and C-array exports.
//! - [`recommender`]: cosine-similarity collaborative filtering and the
//!   sparsity study around it.

pub mod optimizer;
pub mod predictor;
pub mod problem;
pub mod recommender;
pub mod sim;
pub mod telemetry;

pub(crate) mod rng;
