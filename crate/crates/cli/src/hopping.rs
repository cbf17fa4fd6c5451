use std::path::{Path, PathBuf};
use std::sync::Arc;

use lorahop::optimizer::solve_exact;
use lorahop::predictor::{export_c_array, export_flat, import_flat, train, AdamConfig, FcnnModel, TrainConfig};
use lorahop::problem::Scenario;
use lorahop::sim::{
    compare_strategies, resolve_policies, run_with_policies, ChannelTrace, ModelSource, Policy,
    SimConfig, SizeComparison, Strategy,
};
use lorahop::telemetry::{generate_labeled_dataset, Dataset, DEFAULT_ROWS};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::{read_bytes, read_json, read_text, write_bytes, write_json};
use crate::manifest::Run;

pub const DEFAULT_SYMBOL: &str = "hopping_model";

fn load_trace(path: Option<&Path>, run: &mut Run) -> Result<ChannelTrace, CliError> {
    match path {
        Some(p) => Ok(ChannelTrace::from_reader(read_bytes(p, run)?.as_slice())?),
        None => {
            run.input("trace", b"bundled");
            Ok(ChannelTrace::bundled())
        }
    }
}

pub struct OptimizeArgs {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub alpha: f64,
    pub beta: f64,
    pub budget: u64,
    pub seed: u64,
}

pub fn optimize(a: &OptimizeArgs) -> Result<(), CliError> {
    let mut run = Run::start("optimize");
    let text = read_text(&a.scenario, &mut run)?;
    run.settings(&(a.alpha, a.beta, a.budget))?;
    run.seed(a.seed);
    let scenario = Scenario::from_json(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let result = solve_exact(&scenario, a.alpha, a.beta, a.budget)?;
    write_json(&a.out, &result, &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}

/// Parses `random_hop`, `sensing_hop`, `oracle`, `fixed:<MHz>` or
/// `model:<path>`.
pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s.split_once(':') {
        None => match s {
            "random_hop" => Ok(Strategy::RandomHop),
            "sensing_hop" => Ok(Strategy::SensingHop),
            "oracle" => Ok(Strategy::PredictorHop { model: ModelSource::Oracle }),
            _ => Err(format!("unknown strategy {s:?}")),
        },
        Some(("fixed", f)) => f
            .parse()
            .map(|freq_mhz| Strategy::Fixed { freq_mhz })
            .map_err(|_| format!("bad carrier {f:?}")),
        Some(("model", p)) => Ok(Strategy::PredictorHop { model: ModelSource::File(p.into()) }),
        Some((k, _)) => Err(format!("unknown strategy {k:?}")),
    }
}

pub struct SimulateArgs {
    pub config: PathBuf,
    pub trace: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub strategy: Option<Strategy>,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut run = Run::start("simulate");
    let mut cfg: SimConfig = read_json(&a.config, &mut run)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(s) = &a.strategy {
        cfg = cfg.with_strategy(s.clone());
    }
    run.settings(&cfg)?;
    run.seed(cfg.seed);
    let trace = load_trace(a.trace.as_deref(), &mut run)?;
    for n in &cfg.nodes {
        if let Strategy::PredictorHop { model: ModelSource::File(p) } = &n.strategy {
            read_bytes(p, &mut run)?;
        }
    }
    let policies = resolve_policies(&cfg, &trace)?;
    let report = run_with_policies(&cfg, &trace, policies)?;
    if a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut buf = Vec::new();
        report.write_events_csv(&mut buf)?;
        write_bytes(&a.out, &buf, &mut run)?;
    } else {
        write_json(&a.out, &report, &mut run)?;
    }
    run.finish(&a.out)?;
    Ok(())
}

pub struct DatasetArgs {
    pub config: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub rows: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// Default behaviour policy for data collection and baseline for the
/// comparison: one end-node hopping at random.
pub fn default_sim_config() -> SimConfig {
    SimConfig::single("B", Strategy::RandomHop)
}

pub fn gen_dataset(a: &DatasetArgs) -> Result<(), CliError> {
    let mut run = Run::start("gen-dataset");
    let cfg = match &a.config {
        Some(p) => read_json(p, &mut run)?,
        None => default_sim_config(),
    };
    run.settings(&(&cfg, a.rows))?;
    run.seed(a.seed);
    let trace = load_trace(a.trace.as_deref(), &mut run)?;
    let ds = generate_labeled_dataset(&trace, &cfg, a.rows, a.seed)?;
    write_bytes(&a.out, ds.to_json()?.as_bytes(), &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}

pub struct TrainArgs {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub l1: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub train: TrainConfig,
    pub l1_lambda: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self { train: TrainConfig::default(), l1_lambda: lorahop::predictor::DEFAULT_L1_LAMBDA }
    }
}

fn fit(ds: &Dataset, s: &TrainSettings) -> Result<(FcnnModel, lorahop::predictor::TrainReport), CliError> {
    let mut model = FcnnModel::init(ds.input_dim(), ds.channels, s.train.seed)?;
    model.l1_lambda = s.l1_lambda;
    let report = train(&mut model, &ds.rows, &s.train)?;
    Ok((model, report))
}

fn report_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn train_cmd(a: &TrainArgs) -> Result<(), CliError> {
    let mut run = Run::start("train");
    let mut s: TrainSettings = match &a.config {
        Some(p) => read_json(p, &mut run)?,
        None => TrainSettings::default(),
    };
    if let Some(e) = a.epochs {
        s.train.epochs = e;
    }
    if let Some(b) = a.batch_size {
        s.train.batch_size = b;
    }
    if let Some(lr) = a.lr {
        s.train.adam = AdamConfig { lr, ..s.train.adam };
    }
    if let Some(l1) = a.l1 {
        s.l1_lambda = l1;
    }
    if let Some(seed) = a.seed {
        s.train.seed = seed;
    }
    run.settings(&s)?;
    run.seed(s.train.seed);
    let ds = Dataset::from_json(&read_text(&a.dataset, &mut run)?)?;
    let (model, report) = fit(&ds, &s)?;
    write_bytes(&a.out, &export_flat(&model)?, &mut run)?;
    write_json(&report_path(&a.out, ".train.json"), &report, &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Flat,
    CArray,
}

pub struct ExportArgs {
    pub model: PathBuf,
    pub format: ExportFormat,
    pub symbol: String,
    pub out: PathBuf,
}

pub fn export(a: &ExportArgs) -> Result<(), CliError> {
    let mut run = Run::start("export");
    run.settings(&(a.format == ExportFormat::CArray, &a.symbol))?;
    let model = import_flat(&read_bytes(&a.model, &mut run)?)?;
    let bytes = match a.format {
        ExportFormat::Flat => export_flat(&model)?,
        ExportFormat::CArray => export_c_array(&model, &a.symbol)?.into_bytes(),
    };
    write_bytes(&a.out, &bytes, &mut run)?;
    run.finish(&a.out)?;
    Ok(())
}

/// Everything the end-to-end run needs; every field has a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Simulation used for data collection and as the random baseline.
    pub sim: SimConfig,
    pub dataset_rows: usize,
    pub training: TrainSettings,
    pub symbol: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sim: default_sim_config(),
            dataset_rows: DEFAULT_ROWS,
            training: TrainSettings::default(),
            symbol: DEFAULT_SYMBOL.into(),
        }
    }
}

pub struct PipelineArgs {
    pub config: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct PipelineReport {
    seed: u64,
    dataset_rows: usize,
    test_accuracy: Option<f64>,
    initial_train_loss: f64,
    final_train_loss: f64,
    model_bytes: usize,
    comparison: Vec<SizeComparison>,
}

pub const PERFORMANCE_HEADER: &str = "metric,size,strategy,value\n";

/// Three panels (RSSI, SNR, PDR) per payload size for both strategies.
pub fn performance_csv(rows: &[SizeComparison]) -> String {
    let mut out = String::from(PERFORMANCE_HEADER);
    type Pick = fn(&SizeComparison) -> (f64, f64);
    let panels: [(&str, Pick); 3] = [
        ("rssi_dbm", |c| (c.rssi_a, c.rssi_b)),
        ("snr_db", |c| (c.snr_a, c.snr_b)),
        ("pdr", |c| (c.pdr_a, c.pdr_b)),
    ];
    for (metric, pick) in panels {
        for c in rows {
            let (a, b) = pick(c);
            out.push_str(&format!("{metric},{},predictor_hop,{a}\n", c.size));
            out.push_str(&format!("{metric},{},random_hop,{b}\n", c.size));
        }
    }
    out
}

pub fn pipeline(a: &PipelineArgs) -> Result<(), CliError> {
    let mut run = Run::start("pipeline");
    let mut cfg: PipelineConfig = match &a.config {
        Some(p) => read_json(p, &mut run).map_err(|e| e.in_stage("config"))?,
        None => PipelineConfig::default(),
    };
    cfg.sim.seed = a.seed;
    cfg.training.train.seed = a.seed;
    run.settings(&cfg)?;
    run.seed(a.seed);
    let trace = load_trace(a.trace.as_deref(), &mut run).map_err(|e| e.in_stage("trace"))?;
    let dir = &a.out;

    let ds = generate_labeled_dataset(&trace, &cfg.sim, cfg.dataset_rows, a.seed)
        .map_err(|e| CliError::from(e).in_stage("dataset"))?;
    write_bytes(&dir.join("dataset.json"), ds.to_json()?.as_bytes(), &mut run)?;

    let (model, train_report) = fit(&ds, &cfg.training).map_err(|e| e.in_stage("train"))?;
    write_json(&dir.join("train_report.json"), &train_report, &mut run)?;

    let flat = export_flat(&model).map_err(|e| CliError::from(e).in_stage("export"))?;
    write_bytes(&dir.join("model.fhop"), &flat, &mut run)?;
    let c_text = export_c_array(&model, &cfg.symbol).map_err(|e| CliError::from(e).in_stage("export"))?;
    write_bytes(&dir.join("model.h"), c_text.as_bytes(), &mut run)?;

    let baseline = cfg.sim.with_strategy(Strategy::RandomHop);
    let random = run_with_policies(&baseline, &trace, resolve_policies(&baseline, &trace)?)
        .map_err(|e| CliError::from(e).in_stage("simulate"))?;
    let model = Arc::new(model);
    let tiny_cfg = cfg.sim.with_strategy(Strategy::PredictorHop {
        model: ModelSource::File(dir.join("model.fhop")),
    });
    let policies = vec![Policy::Model(model); tiny_cfg.nodes.len()];
    let tiny = run_with_policies(&tiny_cfg, &trace, policies).map_err(|e| CliError::from(e).in_stage("simulate"))?;
    write_json(&dir.join("sim_random.json"), &random, &mut run)?;
    write_json(&dir.join("sim_predictor.json"), &tiny, &mut run)?;

    let comparison = compare_strategies(&tiny, &random).map_err(|e| CliError::from(e).in_stage("compare"))?;
    write_json(&dir.join("comparison.json"), &comparison, &mut run)?;
    write_bytes(&dir.join("performance.csv"), performance_csv(&comparison).as_bytes(), &mut run)?;
    write_json(
        &dir.join("pipeline_report.json"),
        &PipelineReport {
            seed: a.seed,
            dataset_rows: ds.rows.len(),
            test_accuracy: train_report.test_accuracy,
            initial_train_loss: train_report.initial_train_loss,
            final_train_loss: train_report.final_train_loss(),
            model_bytes: flat.len(),
            comparison,
        },
        &mut run,
    )?;
    run.finish(&dir.join("pipeline"))?;
    Ok(())
}
