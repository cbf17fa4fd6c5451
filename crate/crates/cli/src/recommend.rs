use std::path::PathBuf;

use lorahop::recommender::{
    impute as impute_matrix, study as run_study, synthetic_ratings, RatingsMatrix, Similarity,
    StudyConfig, SyntheticConfig,
};

use crate::error::CliError;
use crate::io::{read_bytes, read_json, write_bytes, write_json};
use crate::manifest::Run;

fn similarity(missing_as_zero: bool) -> Similarity {
    if missing_as_zero {
        Similarity::MissingAsZero
    } else {
        Similarity::CommonSupport
    }
}

fn csv_bytes(m: &RatingsMatrix) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    m.to_csv(&mut buf)?;
    Ok(buf)
}

pub struct ImputeArgs {
    pub input: PathBuf,
    pub k: usize,
    pub missing_as_zero: bool,
    pub out: PathBuf,
}

pub fn impute(a: &ImputeArgs) -> Result<(), CliError> {
    let mut run = Run::start("recommend impute");
    let sparse = RatingsMatrix::from_csv(read_bytes(&a.input, &mut run)?.as_slice())?;
    run.settings(&(a.k, a.missing_as_zero))?;
    let full = impute_matrix(&sparse, a.k, similarity(a.missing_as_zero))?;
    write_bytes(&a.out, &csv_bytes(&full)?, &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}

pub struct StudyArgs {
    pub config: Option<PathBuf>,
    pub sparsities: Option<Vec<u32>>,
    pub seeds: Option<u64>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub missing_as_zero: bool,
    pub jobs: usize,
    pub out: PathBuf,
}

pub fn study(a: &StudyArgs) -> Result<(), CliError> {
    let mut run = Run::start("recommend study");
    let mut cfg: StudyConfig = match &a.config {
        Some(p) => read_json(p, &mut run)?,
        None => StudyConfig::default(),
    };
    if let Some(s) = &a.sparsities {
        cfg.sparsities = s.clone();
    }
    if let Some(n) = a.seeds {
        cfg.seeds = n;
    }
    if let Some(s) = a.seed {
        cfg.first_seed = s;
    }
    if let Some(k) = a.k {
        cfg.neighbors = k;
    }
    if a.missing_as_zero {
        cfg.similarity = Similarity::MissingAsZero;
    }
    run.settings(&cfg)?;
    for s in cfg.first_seed..cfg.first_seed.saturating_add(cfg.seeds) {
        run.seed(s);
    }
    let report = run_study(&cfg, a.jobs)?;
    write_json(&a.out, &report, &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}

pub struct SynthArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let mut run = Run::start("recommend synth");
    let mut cfg: SyntheticConfig = match &a.config {
        Some(p) => read_json(p, &mut run)?,
        None => SyntheticConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    run.settings(&cfg)?;
    run.seed(cfg.seed);
    let m = synthetic_ratings(&cfg)?;
    write_bytes(&a.out, &csv_bytes(&m)?, &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}
