//! Collaborative filtering for soil/plant suitability ratings.
//!
//! Missing ratings are predicted from the most similar rows (cosine
//! similarity) as a similarity-weighted average. [`study`] measures how
//! prediction quality degrades as more ratings are hidden.

mod cf;
mod matrix;
mod study;
mod synthetic;

pub use cf::{
    cosine, evaluate, impute, rating_distribution, similarity_table, sparsify, weighted_vote,
    ConfusionMatrix, Similarity, DEFAULT_NEIGHBORS,
};
pub use matrix::RatingsMatrix;
pub use study::{study, SeedResult, SparsityResult, StudyConfig, StudyReport, DEFAULT_SPARSITIES};
pub use synthetic::{synthetic_ratings, SyntheticConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecommenderError {
    #[error("shape: {0}")]
    Shape(String),
    #[error("rating {0} outside 1..=5")]
    Rating(u8),
    #[error("sparsity: {0}")]
    Sparsity(String),
    #[error("row {0} has no ratings")]
    EmptyRow(usize),
    #[error("ratings CSV: {0}")]
    Csv(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
