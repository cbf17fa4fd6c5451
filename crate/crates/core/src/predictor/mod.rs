//! Channel predictor: a small dense classifier over telemetry snapshots.
//!
//! The network has two hidden layers of [`HIDDEN`] units and a softmax
//! over the carriers. Training is mini-batch Adam on cross-entropy with an
//! optional L1 penalty on the weight matrices. Trained models serialize to
//! a flat little-endian file or to a C byte array for firmware builds.

mod export;
mod model;
mod train;

pub use export::{export_c_array, export_flat, flat_size, import_flat, parse_c_array, FORMAT_VERSION, MAGIC};
pub use model::{param_count, softmax, Activation, FcnnModel, DEFAULT_L1_LAMBDA, HIDDEN};
pub use train::{split_sizes, train, AdamConfig, EpochStats, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("invalid model shape: input_dim {input_dim}, channels {channels} (need >= 1 and >= 2)")]
    InvalidDims { input_dim: usize, channels: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite input")]
    NonFinite,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training config: {0}")]
    Config(String),
    #[error("loss diverged at epoch {epoch}; lower the learning rate")]
    Diverged { epoch: usize },
    #[error("model file: {0}")]
    Format(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0:?} is not a valid C identifier")]
    InvalidSymbol(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
