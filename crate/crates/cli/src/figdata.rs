use std::fmt::Write as _;
use std::path::PathBuf;

use lorahop::predictor::{export_c_array, flat_size, FcnnModel};
use lorahop::recommender::StudyReport;
use lorahop::sim::SizeComparison;
use lorahop::telemetry::feature_len;

use crate::error::CliError;
use crate::hopping::{performance_csv, DEFAULT_SYMBOL};
use crate::io::{read_json, write_bytes};
use crate::manifest::Run;

pub const COMPARISON_FILE: &str = "comparison.json";
pub const STUDY_FILE: &str = "study.json";
pub const MIN_CHANNELS: usize = 2;
pub const MAX_CHANNELS: usize = 9;

pub struct FigdataArgs {
    pub workspace: PathBuf,
    pub out: Option<PathBuf>,
    pub window_slots: usize,
}

/// Export sizes of an untrained network for every carrier count.
pub fn model_sizes_csv(window_slots: usize) -> Result<String, CliError> {
    let mut out = String::from("channels,input_dim,flat_bytes,c_array_bytes\n");
    for f in MIN_CHANNELS..=MAX_CHANNELS {
        let dim = feature_len(window_slots, f);
        let model = FcnnModel::zeros(dim, f)?;
        let c_len = export_c_array(&model, DEFAULT_SYMBOL)?.len();
        writeln!(out, "{f},{dim},{},{c_len}", flat_size(dim, f)).expect("string write");
    }
    Ok(out)
}

fn confusion_csv(report: &StudyReport) -> String {
    let mut out = String::from("sparsity_pct,true_rating,predicted_rating,count\n");
    for level in &report.levels {
        for (t, row) in level.confusion.counts.iter().enumerate() {
            for (p, n) in row.iter().enumerate() {
                writeln!(out, "{},{},{},{n}", level.sparsity_pct, t + 1, p + 1).expect("string write");
            }
        }
    }
    out
}

fn accuracy_csv(report: &StudyReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("sparsity_pct,rating,accuracy\n");
    for level in &report.levels {
        for (r, acc) in level.per_class_accuracy.iter().enumerate() {
            writeln!(out, "{},{},{}", level.sparsity_pct, r + 1, opt(*acc)).expect("string write");
        }
        writeln!(out, "{},mean,{}", level.sparsity_pct, opt(level.mean_class_accuracy)).expect("string write");
    }
    out
}

/// Rating histograms: the complete matrices, then each imputed level.
fn distribution_csv(report: &StudyReport) -> String {
    let mut out = String::from("matrix,rating,count\n");
    let mut truth = [0u64; 5];
    for d in &report.truth_distribution {
        for (t, n) in truth.iter_mut().zip(d) {
            *t += n;
        }
    }
    for (r, n) in truth.iter().enumerate() {
        writeln!(out, "truth,{},{n}", r + 1).expect("string write");
    }
    for level in &report.levels {
        let mut sum = [0u64; 5];
        for s in &level.seeds {
            for (t, n) in sum.iter_mut().zip(&s.distribution) {
                *t += n;
            }
        }
        for (r, n) in sum.iter().enumerate() {
            writeln!(out, "imputed_{},{},{n}", level.sparsity_pct, r + 1).expect("string write");
        }
    }
    out
}

pub fn figdata(a: &FigdataArgs) -> Result<(), CliError> {
    let mut run = Run::start("figdata");
    run.settings(&a.window_slots)?;
    if a.window_slots == 0 {
        return Err(CliError::Input("window slots must be positive".into()));
    }
    let ws = &a.workspace;
    let comparison_path = ws.join(COMPARISON_FILE);
    let study_path = ws.join(STUDY_FILE);
    if !comparison_path.is_file() && !study_path.is_file() {
        return Err(CliError::Input(format!(
            "{}: neither {COMPARISON_FILE} nor {STUDY_FILE} found",
            ws.display()
        )));
    }
    let out_dir = a.out.clone().unwrap_or_else(|| ws.join("figdata"));
    let out = |name: &str| -> PathBuf { out_dir.join(name) };

    if comparison_path.is_file() {
        let rows: Vec<SizeComparison> = read_json(&comparison_path, &mut run)?;
        write_bytes(&out("performance.csv"), performance_csv(&rows).as_bytes(), &mut run)?;
    }
    write_bytes(&out("model_size.csv"), model_sizes_csv(a.window_slots)?.as_bytes(), &mut run)?;
    if study_path.is_file() {
        let report: StudyReport = read_json(&study_path, &mut run)?;
        write_bytes(&out("cf_confusion.csv"), confusion_csv(&report).as_bytes(), &mut run)?;
        write_bytes(&out("cf_accuracy.csv"), accuracy_csv(&report).as_bytes(), &mut run)?;
        write_bytes(&out("cf_distribution.csv"), distribution_csv(&report).as_bytes(), &mut run)?;
    }
    run.finish(&out_dir.join("figdata"))?;
    Ok(())
}
