use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{RatingsMatrix, RecommenderError};
use crate::rng::seeded;

/// Seeded low-rank generator: every soil belongs to one archetype, every
/// archetype has an integer affinity profile over the plants, and a
/// soil's rating is its archetype's profile plus Gaussian noise, rounded
/// and clamped to 1..=5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub soils: usize,
    pub plants: usize,
    pub archetypes: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { soils: 500, plants: 20, archetypes: 5, noise_sd: 0.25, seed: 0 }
    }
}

pub fn synthetic_ratings(cfg: &SyntheticConfig) -> Result<RatingsMatrix, RecommenderError> {
    if cfg.soils == 0 || cfg.plants == 0 || cfg.archetypes == 0 {
        return Err(RecommenderError::Shape(format!(
            "need at least one soil, plant and archetype (got {} x {} x {})",
            cfg.soils, cfg.plants, cfg.archetypes
        )));
    }
    let noise = Normal::new(0.0, cfg.noise_sd)
        .map_err(|_| RecommenderError::Shape(format!("invalid noise_sd {}", cfg.noise_sd)))?;
    let mut rng = seeded(cfg.seed);
    let profiles: Vec<Vec<f64>> = (0..cfg.archetypes)
        .map(|_| (0..cfg.plants).map(|_| f64::from(rng.random_range(1u8..=5))).collect())
        .collect();
    let mut values = Vec::with_capacity(cfg.soils * cfg.plants);
    for i in 0..cfg.soils {
        let profile = &profiles[i % cfg.archetypes];
        for &p in profile {
            let r: f64 = p + noise.sample(&mut rng);
            values.push(r.round().clamp(1.0, 5.0) as u8);
        }
    }
    RatingsMatrix::complete(cfg.soils, cfg.plants, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_seeded_and_complete() {
        let cfg = SyntheticConfig { soils: 30, plants: 6, ..Default::default() };
        let a = synthetic_ratings(&cfg).unwrap();
        assert_eq!(a, synthetic_ratings(&cfg).unwrap());
        assert_eq!(a.missing_count(), 0);
        assert_eq!((a.rows(), a.cols()), (30, 6));
        let b = synthetic_ratings(&SyntheticConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, b);
    }
}
