use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RatingsMatrix, RecommenderError};
use crate::rng::seeded;

pub const DEFAULT_NEIGHBORS: usize = 20;

/// How rows with missing ratings are compared.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Similarity {
    /// Only coordinates rated in both rows.
    #[default]
    CommonSupport,
    /// Missing ratings read as zero.
    MissingAsZero,
}

/// Cosine similarity of two rating rows; `None` when no coordinate is
/// usable or a norm vanishes.
pub fn cosine(x: &[Option<u8>], y: &[Option<u8>], mode: Similarity) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let (mut dot, mut nx, mut ny) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (a, b) = match (mode, a, b) {
            (Similarity::CommonSupport, Some(a), Some(b)) => (f64::from(*a), f64::from(*b)),
            (Similarity::CommonSupport, _, _) => continue,
            (Similarity::MissingAsZero, a, b) => {
                (f64::from(a.unwrap_or(0)), f64::from(b.unwrap_or(0)))
            }
        };
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    (nx > 0.0 && ny > 0.0).then(|| dot / (nx.sqrt() * ny.sqrt()))
}

/// Removes exactly `floor(rows * cols * pct / 100)` ratings chosen
/// uniformly at random, never emptying a row.
pub fn sparsify(full: &RatingsMatrix, pct: u32, seed: u64) -> Result<RatingsMatrix, RecommenderError> {
    if pct > 99 {
        return Err(RecommenderError::Sparsity(format!("{pct}% is outside 0..=99")));
    }
    if full.missing_count() > 0 {
        return Err(RecommenderError::Sparsity("input already has missing ratings".into()));
    }
    let (m, n) = (full.rows(), full.cols());
    let target = m * n * pct as usize / 100;
    if target > m * n - m {
        return Err(RecommenderError::Sparsity(format!(
            "removing {target} of {} cells would empty a row",
            m * n
        )));
    }
    let mut cells: Vec<usize> = (0..m * n).collect();
    cells.shuffle(&mut seeded(seed));
    let mut left = vec![n; m];
    let mut out = full.clone();
    let mut removed = 0;
    for k in cells {
        if removed == target {
            break;
        }
        let (i, j) = (k / n, k % n);
        if left[i] > 1 {
            left[i] -= 1;
            out.set(i, j, None);
            removed += 1;
        }
    }
    Ok(out)
}

/// Row-by-row similarity table; `None` for undefined pairs and the diagonal.
pub fn similarity_table(m: &RatingsMatrix, mode: Similarity) -> Vec<Vec<Option<f64>>> {
    (0..m.rows())
        .into_par_iter()
        .map(|i| {
            (0..m.rows())
                .map(|r| if r == i { None } else { cosine(m.row(i), m.row(r), mode) })
                .collect()
        })
        .collect()
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

fn clamp_rating(x: f64) -> u8 {
    x.clamp(1.0, 5.0) as u8
}

/// Similarity-weighted mean of `(similarity, rating)` pairs, rounded half
/// up and clamped to 1..=5; `None` when the weights sum to zero.
pub fn weighted_vote(votes: impl IntoIterator<Item = (f64, u8)>) -> Option<u8> {
    let (mut num, mut den) = (0.0, 0.0);
    for (s, v) in votes {
        num += s * f64::from(v);
        den += s;
    }
    (den > 0.0).then(|| clamp_rating(round_half_up(num / den)))
}

/// Fills every missing cell with the similarity-weighted mean rating of
/// the `k` most similar rows that rated the column, rounded half up.
/// Cells without a usable neighbour take the rounded row mean.
pub fn impute(sparse: &RatingsMatrix, k: usize, mode: Similarity) -> Result<RatingsMatrix, RecommenderError> {
    let (m, n) = (sparse.rows(), sparse.cols());
    if let Some(i) = (0..m).find(|&i| sparse.row(i).iter().all(Option::is_none)) {
        return Err(RecommenderError::EmptyRow(i));
    }
    let sims = similarity_table(sparse, mode);
    let filled: Vec<Vec<Option<u8>>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let row = sparse.row(i);
            let present: Vec<f64> = row.iter().flatten().map(|&v| f64::from(v)).collect();
            let fallback = clamp_rating(round_half_up(present.iter().sum::<f64>() / present.len() as f64));
            let mut ranked: Vec<(usize, f64)> = sims[i]
                .iter()
                .enumerate()
                .filter_map(|(r, s)| s.map(|s| (r, s)))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            (0..n)
                .map(|j| {
                    if row[j].is_some() {
                        return row[j];
                    }
                    let votes = ranked
                        .iter()
                        .filter_map(|&(r, s)| sparse.get(r, j).map(|v| (s, v)))
                        .take(k);
                    Some(weighted_vote(votes).unwrap_or(fallback))
                })
                .collect()
        })
        .collect();
    RatingsMatrix::new(m, n, filled.into_iter().flatten().collect())
}

/// Counts of (true rating, predicted rating), ratings 1..=5.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 5]; 5],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Diagonal over row sum for each true rating; `None` for ratings that
    /// never occur in the truth.
    pub fn per_class_accuracy(&self) -> [Option<f64>; 5] {
        std::array::from_fn(|r| {
            let row: u64 = self.counts[r].iter().sum();
            (row > 0).then(|| self.counts[r][r] as f64 / row as f64)
        })
    }

    /// Unweighted mean of the defined per-class accuracies.
    pub fn mean_class_accuracy(&self) -> Option<f64> {
        let acc: Vec<f64> = self.per_class_accuracy().into_iter().flatten().collect();
        (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| (0..5).map(|r| self.counts[r][r]).sum::<u64>() as f64 / total as f64)
    }
}

/// Compares `imputed` with `truth` on the cells flagged in `mask`.
pub fn evaluate(truth: &RatingsMatrix, imputed: &RatingsMatrix, mask: &[bool]) -> Result<ConfusionMatrix, RecommenderError> {
    let cells = truth.rows() * truth.cols();
    if imputed.rows() != truth.rows() || imputed.cols() != truth.cols() || mask.len() != cells {
        return Err(RecommenderError::Shape(format!(
            "truth {}x{}, imputed {}x{}, mask {}",
            truth.rows(),
            truth.cols(),
            imputed.rows(),
            imputed.cols(),
            mask.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (k, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let (Some(t), Some(p)) = (truth.values()[k], imputed.values()[k]) else {
            return Err(RecommenderError::Shape(format!("cell {k} is missing in truth or prediction")));
        };
        cm.counts[usize::from(t) - 1][usize::from(p) - 1] += 1;
    }
    Ok(cm)
}

/// Histogram of present ratings 1..=5.
pub fn rating_distribution(m: &RatingsMatrix) -> [u64; 5] {
    let mut h = [0; 5];
    for v in m.values().iter().flatten() {
        h[usize::from(*v) - 1] += 1;
    }
    h
}
