//! Trace-driven replay of LoRa end-nodes sharing a few carriers.
//!
//! Each slot every node picks a carrier through its strategy, sends one
//! packet whose delivery and link quality are drawn from the
//! [`ChannelTrace`], and collisions on a shared (gateway, carrier, phase)
//! are resolved with a capture threshold. After the slot each node's
//! [`TelemetryWindow`](crate::telemetry::TelemetryWindow) receives the
//! channel report.

mod config;
mod engine;
mod report;
mod trace;

pub use config::{
    HopGranularity, ModelSource, NodeConfig, Placement, SimConfig, Strategy,
    DEFAULT_PACKETS_PER_SIZE, DEFAULT_PAYLOAD_SIZES, DEFAULT_SEED,
};
pub use engine::{argmax_lowest, resolve_policies, run, run_with_policies, ChannelModel, Policy, Simulator};
pub use report::{
    compare_strategies, rssi_improvement, snr_improvement, NodeSizeStats, SimReport,
    SizeComparison, SizeSummary, SlotEvent,
};
pub use trace::{ChannelTrace, TraceEntry};

use thiserror::Error;

use crate::telemetry::TelemetryError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trace: {0}")]
    Trace(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("model {path}: {detail}")]
    Model { path: String, detail: String },
    #[error("node {node}: model predicts {got} channels, trace has {expected}")]
    ModelArity { node: usize, expected: usize, got: usize },
    #[error("node {node}: model expects {got} features, telemetry window yields {expected}")]
    ModelInput { node: usize, expected: usize, got: usize },
    #[error("node {node}: inference failed: {detail}")]
    Inference { node: usize, detail: String },
    #[error("payload sizes differ: {a:?} vs {b:?}")]
    SizeMismatch { a: Vec<u32>, b: Vec<u32> },
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
}
