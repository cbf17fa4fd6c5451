//! Per-node telemetry history and the labelled datasets built from it.
//!
//! A [`TelemetryWindow`] keeps the last few channel reports a node received
//! and flattens them into a normalized feature vector. Labelled rows come
//! from [`generate_labeled_dataset`], which replays every slot on each
//! carrier and labels it with the carrier that would have given the best
//! RSSI.

mod dataset;
mod window;

pub use dataset::{generate_labeled_dataset, Dataset, DatasetRow, DEFAULT_ROWS, NORMALIZATION};
pub use window::{feature_len, TelemetryWindow, DEFAULT_WINDOW_SLOTS, RSSI_FLOOR_DBM, SNR_FLOOR_DB};

use thiserror::Error;

use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("window needs at least one slot and one channel (got {slots} x {channels})")]
    InvalidShape { slots: usize, channels: usize },
    #[error("availability vector has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("rssi and snr must be finite")]
    NonFinite,
    #[error("requested row count must be positive")]
    NoRows,
    #[error("dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation: {0}")]
    Sim(Box<SimError>),
}

impl From<SimError> for TelemetryError {
    fn from(e: SimError) -> Self {
        TelemetryError::Sim(Box::new(e))
    }
}
