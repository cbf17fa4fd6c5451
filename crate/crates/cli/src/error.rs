use std::process::ExitCode;

use lorahop::optimizer::SolveError;
use lorahop::predictor::PredictorError;
use lorahop::recommender::RecommenderError;
use lorahop::sim::SimError;
use lorahop::telemetry::TelemetryError;
use thiserror::Error;

/// Failures surfaced to the shell. Input problems exit with 2, failures of
/// the computation itself (infeasible, diverged, ...) with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Domain(_) => ExitCode::from(1),
        }
    }

    /// Prefixes the message with the pipeline stage that failed.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("stage {stage}: {m}")),
            CliError::Domain(m) => CliError::Domain(format!("stage {stage}: {m}")),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("JSON: {e}"))
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Problem(_) => CliError::Input(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Inference { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TelemetryError> for CliError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::Sim(inner) => (*inner).into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PredictorError> for CliError {
    fn from(e: PredictorError) -> Self {
        match e {
            PredictorError::Diverged { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<RecommenderError> for CliError {
    fn from(e: RecommenderError) -> Self {
        CliError::Input(e.to_string())
    }
}
