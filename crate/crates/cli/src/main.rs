mod error;
mod figdata;
mod hopping;
mod io;
mod manifest;
mod recommend;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lorahop::optimizer::{DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_BUDGET};
use lorahop::recommender::DEFAULT_NEIGHBORS;
use lorahop::sim::{Strategy, DEFAULT_SEED};
use lorahop::telemetry::{DEFAULT_ROWS, DEFAULT_WINDOW_SLOTS};

use error::CliError;
use hopping::ExportFormat;

#[derive(Debug, Parser)]
#[command(name = "lorahop", version, about = "LoRa channel hopping: optimisation, simulation, on-device prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario exactly and write the schedule.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Recorded in the manifest; the solver itself is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay the channel trace for a set of nodes. A `.csv` output gets
    /// the per-packet event log, anything else the JSON report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override every node: random_hop, sensing_hop, oracle,
        /// fixed:<MHz> or model:<path>.
        #[arg(long, value_parser = hopping::parse_strategy)]
        strategy: Option<Strategy>,
    },
    /// Generate a labelled telemetry dataset.
    GenDataset {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ROWS)]
        rows: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the channel predictor and write it in flat format.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        l1: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Convert a flat model file.
    Export {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long, default_value = hopping::DEFAULT_SYMBOL)]
        symbol: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dataset, training, export and the predictor-vs-random comparison in
    /// one go.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Collaborative filtering on rating matrices.
    #[command(subcommand)]
    Recommend(RecommendCommand),
    /// Emit plot-ready CSV from earlier outputs in a workspace directory.
    Figdata {
        #[arg(long)]
        workspace: PathBuf,
        /// Defaults to `<workspace>/figdata`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_SLOTS)]
        window_slots: usize,
    },
}

#[derive(Debug, Subcommand)]
enum RecommendCommand {
    /// Fill the empty cells of a ratings CSV.
    Impute {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
        k: usize,
        #[arg(long)]
        missing_as_zero: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy of imputation as ratings are hidden.
    Study {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        sparsities: Option<Vec<u32>>,
        #[arg(long)]
        seeds: Option<u64>,
        /// First seed of the run.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        missing_as_zero: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic complete ratings matrix.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Optimize { scenario, out, alpha, beta, budget, seed } => {
            hopping::optimize(&hopping::OptimizeArgs { scenario, out, alpha, beta, budget, seed })
        }
        Command::Simulate { config, trace, out, seed, strategy } => {
            hopping::simulate(&hopping::SimulateArgs { config, trace, out, seed, strategy })
        }
        Command::GenDataset { config, trace, rows, seed, out } => {
            hopping::gen_dataset(&hopping::DatasetArgs { config, trace, rows, seed, out })
        }
        Command::Train { dataset, out, config, epochs, batch_size, lr, l1, seed } => {
            hopping::train_cmd(&hopping::TrainArgs { dataset, out, config, epochs, batch_size, lr, l1, seed })
        }
        Command::Export { model, format, symbol, out } => {
            hopping::export(&hopping::ExportArgs { model, format, symbol, out })
        }
        Command::Pipeline { config, trace, out, seed } => {
            hopping::pipeline(&hopping::PipelineArgs { config, trace, out, seed })
        }
        Command::Recommend(RecommendCommand::Impute { input, k, missing_as_zero, out }) => {
            recommend::impute(&recommend::ImputeArgs { input, k, missing_as_zero, out })
        }
        Command::Recommend(RecommendCommand::Study { config, sparsities, seeds, seed, k, missing_as_zero, jobs, out }) => {
            recommend::study(&recommend::StudyArgs { config, sparsities, seeds, seed, k, missing_as_zero, jobs, out })
        }
        Command::Recommend(RecommendCommand::Synth { config, seed, out }) => {
            recommend::synth(&recommend::SynthArgs { config, seed, out })
        }
        Command::Figdata { workspace, out, window_slots } => {
            figdata::figdata(&figdata::FigdataArgs { workspace, out, window_slots })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
