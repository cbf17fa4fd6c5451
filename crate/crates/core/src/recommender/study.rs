use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, impute, rating_distribution, sparsify, synthetic_ratings, ConfusionMatrix,
    RecommenderError, Similarity, SyntheticConfig, DEFAULT_NEIGHBORS,
};

pub const DEFAULT_SPARSITIES: [u32; 5] = [10, 30, 50, 70, 90];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub sparsities: Vec<u32>,
    /// Number of seeds, counted up from `first_seed`; each seed generates
    /// its own matrix and mask.
    pub seeds: u64,
    pub first_seed: u64,
    pub neighbors: usize,
    pub similarity: Similarity,
    pub synthetic: SyntheticConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            sparsities: DEFAULT_SPARSITIES.to_vec(),
            seeds: 5,
            first_seed: 0,
            neighbors: DEFAULT_NEIGHBORS,
            similarity: Similarity::default(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub per_class_accuracy: [Option<f64>; 5],
    pub mean_class_accuracy: Option<f64>,
    pub accuracy: Option<f64>,
    /// Rating histogram of the imputed matrix.
    pub distribution: [u64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityResult {
    pub sparsity_pct: u32,
    pub seeds: Vec<SeedResult>,
    /// Confusion matrix summed over seeds.
    pub confusion: ConfusionMatrix,
    pub per_class_accuracy: [Option<f64>; 5],
    /// Mean over seeds of the per-seed mean class accuracy.
    pub mean_class_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    /// Rating histogram of the complete matrix for each seed.
    pub truth_distribution: Vec<[u64; 5]>,
    pub levels: Vec<SparsityResult>,
}

fn run_seed(cfg: &StudyConfig, pct: u32, seed: u64) -> Result<SeedResult, RecommenderError> {
    let truth = synthetic_ratings(&SyntheticConfig { seed, ..cfg.synthetic.clone() })?;
    let sparse = sparsify(&truth, pct, seed)?;
    let filled = impute(&sparse, cfg.neighbors, cfg.similarity)?;
    let confusion = evaluate(&truth, &filled, &sparse.missing_mask())?;
    Ok(SeedResult {
        seed,
        per_class_accuracy: confusion.per_class_accuracy(),
        mean_class_accuracy: confusion.mean_class_accuracy(),
        accuracy: confusion.accuracy(),
        distribution: rating_distribution(&filled),
        confusion,
    })
}

/// Sparsify, impute and score the synthetic matrix for every
/// (sparsity, seed) pair. `jobs` bounds the worker threads; results do not
/// depend on it.
pub fn study(cfg: &StudyConfig, jobs: usize) -> Result<StudyReport, RecommenderError> {
    if cfg.seeds == 0 || cfg.sparsities.is_empty() {
        return Err(RecommenderError::Sparsity("study needs at least one seed and one sparsity level".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RecommenderError::Shape(e.to_string()))?;
    let grid: Vec<(u32, u64)> = cfg
        .sparsities
        .iter()
        .flat_map(|&p| (cfg.first_seed..cfg.first_seed + cfg.seeds).map(move |s| (p, s)))
        .collect();
    let results = pool.install(|| {
        grid.par_iter()
            .map(|&(p, s)| run_seed(cfg, p, s))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut levels = Vec::with_capacity(cfg.sparsities.len());
    for (k, &pct) in cfg.sparsities.iter().enumerate() {
        let seeds = results[k * cfg.seeds as usize..(k + 1) * cfg.seeds as usize].to_vec();
        let mut confusion = ConfusionMatrix::default();
        for s in &seeds {
            for r in 0..5 {
                for c in 0..5 {
                    confusion.counts[r][c] += s.confusion.counts[r][c];
                }
            }
        }
        let means: Vec<f64> = seeds.iter().filter_map(|s| s.mean_class_accuracy).collect();
        levels.push(SparsityResult {
            sparsity_pct: pct,
            per_class_accuracy: confusion.per_class_accuracy(),
            mean_class_accuracy: (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64),
            confusion,
            seeds,
        });
    }
    let truth_distribution = (cfg.first_seed..cfg.first_seed + cfg.seeds)
        .map(|seed| synthetic_ratings(&SyntheticConfig { seed, ..cfg.synthetic.clone() }).map(|m| rating_distribution(&m)))
        .collect::<Result<_, _>>()?;
    Ok(StudyReport { config: cfg.clone(), truth_distribution, levels })
}
