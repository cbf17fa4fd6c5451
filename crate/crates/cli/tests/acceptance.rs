//! Release gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lorahop::optimizer::{
    enumerate_oracle, random_scenario, solve_exact, state_count, InstanceLimits, SolveError,
    DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_BUDGET, DEFAULT_STATE_CAP,
};
use lorahop::predictor::{
    export_c_array, export_flat, flat_size, import_flat, parse_c_array, train, FcnnModel,
    TrainConfig, DEFAULT_L1_LAMBDA, HIDDEN,
};
use lorahop::problem::collision_count;
use lorahop::recommender::{study, StudyConfig};
use lorahop::sim::{run, ChannelTrace, SimConfig, SizeComparison, Strategy};
use lorahop::telemetry::{generate_labeled_dataset, DatasetRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(started: Instant, limit: Duration) -> Result<f64, String> {
    let secs = started.elapsed().as_secs_f64();
    ensure(started.elapsed() < limit, format!("took {secs:.1}s, limit {}s", limit.as_secs()))?;
    Ok(secs)
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let (mut checked, mut feasible, mut seed) = (0u32, 0u32, 0u64);
    while checked < 200 {
        let sc = random_scenario(seed, InstanceLimits::default());
        seed += 1;
        if state_count(&sc) > DEFAULT_STATE_CAP as f64 {
            continue;
        }
        let exact = solve_exact(&sc, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_BUDGET);
        let truth = enumerate_oracle(&sc, DEFAULT_ALPHA, DEFAULT_BETA);
        match (exact, truth) {
            (Ok(e), Ok(t)) => {
                ensure(e.proven_optimal, format!("seed {}: not proven", seed - 1))?;
                ensure(
                    e.objective_value == t.objective_value,
                    format!("seed {}: solver {} vs oracle {}", seed - 1, e.objective_value, t.objective_value),
                )?;
                feasible += 1;
            }
            (Err(SolveError::Infeasible { .. }), Err(SolveError::Infeasible { .. })) => {}
            (e, t) => return Err(format!("seed {}: solver {e:?} vs oracle {t:?}", seed - 1)),
        }
        checked += 1;
    }
    let secs = within_time(started, Duration::from_secs(300))?;
    Ok(format!("{checked} instances ({feasible} feasible) in {secs:.1}s"))
}

fn zero_collisions_with_spare_carriers() -> Outcome {
    let (mut solved, mut tried) = (0u32, 0u32);
    for seed in 0..400u64 {
        let mut sc = random_scenario(seed, InstanceLimits { max_frequencies: 3, ..Default::default() });
        let f = sc.num_nodes.max(sc.frequencies.len());
        sc.frequencies = (0..f).map(|k| 868.1 + 0.2 * k as f64).collect();
        sc.freq_capacity = vec![sc.min_symbols + 2; f];
        sc.gateway_capacity = vec![f as u32; sc.num_gateways];
        tried += 1;
        match solve_exact(&sc, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_BUDGET) {
            Ok(r) => {
                ensure(r.proven_optimal, format!("seed {seed}: not proven"))?;
                let c = collision_count(&sc, &r.schedule).map_err(|e| e.to_string())?;
                ensure(c == 0, format!("seed {seed}: {c} collisions at the optimum"))?;
                solved += 1;
            }
            Err(SolveError::Infeasible { .. }) => {}
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    ensure(solved >= 100, format!("only {solved} feasible instances"))?;
    Ok(format!("{solved} of {tried} instances feasible, all collision-free"))
}

fn trace_fidelity() -> Outcome {
    let trace = ChannelTrace::bundled();
    let mut cells = 0;
    for source in trace.sources() {
        for &freq in trace.frequencies() {
            let cfg = SimConfig {
                rssi_jitter_db: 0.0,
                snr_jitter_db: 0.0,
                ..SimConfig::single(source, Strategy::Fixed { freq_mhz: freq })
            };
            let report = run(&cfg, &trace).map_err(|e| e.to_string())?;
            for &size in trace.sizes() {
                let want = trace.get(source, freq, size).ok_or("missing cell")?;
                let got = report.stats_for(0, size).ok_or("missing stats")?;
                let ok = got.pdr == want.pdr
                    && got.mean_rssi == Some(want.mean_rssi)
                    && got.mean_snr == Some(want.mean_snr);
                ensure(
                    ok,
                    format!(
                        "{source} {freq} {size}: got ({:?}, {:?}, {}) want ({}, {}, {})",
                        got.mean_rssi, got.mean_snr, got.pdr, want.mean_rssi, want.mean_snr, want.pdr
                    ),
                )?;
                cells += 1;
            }
        }
    }
    let a = trace.get("A", 869.0, 30).ok_or("missing A/869/30")?;
    ensure((a.mean_rssi, a.mean_snr, a.pdr) == (-71.5, 9.3, 1.0), "A/869/30 differs from the table")?;
    Ok(format!("{cells} cells exact"))
}

fn lorahop(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lorahop"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("lorahop {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)),
    )
}

fn predictor_beats_random() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    lorahop(dir.path(), &["pipeline", "--out", "run"])?;
    let text = std::fs::read_to_string(dir.path().join("run/comparison.json")).map_err(|e| e.to_string())?;
    let rows: Vec<SizeComparison> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure(rows.len() == 6, format!("{} payload sizes", rows.len()))?;
    let mut best: f64 = f64::NEG_INFINITY;
    for c in &rows {
        ensure(c.rssi_a >= c.rssi_b, format!("size {}: RSSI {} < {}", c.size, c.rssi_a, c.rssi_b))?;
        ensure(c.pdr_a >= 0.98, format!("size {}: predictor PDR {}", c.size, c.pdr_a))?;
        best = best.max(c.rssi_improvement_pct.unwrap_or(f64::NEG_INFINITY));
    }
    ensure(best >= 30.0, format!("best RSSI improvement {best:.1}%"))?;
    let secs = within_time(started, Duration::from_secs(120))?;
    let min_pdr = rows.iter().map(|c| c.pdr_a).fold(1.0, f64::min);
    Ok(format!("max RSSI improvement {best:.1}%, min predictor PDR {min_pdr}, {secs:.1}s"))
}

fn prediction_accuracy() -> Outcome {
    let trace = ChannelTrace::bundled();
    let mut parts = Vec::new();
    for seed in [7u64, 8, 9] {
        let cfg = SimConfig { seed, ..SimConfig::single("B", Strategy::RandomHop) };
        let ds = generate_labeled_dataset(&trace, &cfg, 5000, seed).map_err(|e| e.to_string())?;
        let mut model = FcnnModel::init(ds.input_dim(), ds.channels, seed).map_err(|e| e.to_string())?;
        model.l1_lambda = DEFAULT_L1_LAMBDA;
        let report = train(&mut model, &ds.rows, &TrainConfig { seed, ..Default::default() })
            .map_err(|e| e.to_string())?;
        let acc = report.test_accuracy.ok_or("no test split")?;
        let (first, last) = (report.initial_train_loss, report.final_train_loss());
        ensure(acc >= 0.75, format!("seed {seed}: accuracy {acc:.3}"))?;
        ensure(last <= 0.5 * first, format!("seed {seed}: loss {first:.3} -> {last:.3}"))?;
        parts.push(format!("seed {seed}: acc {acc:.3}, loss {first:.3}->{last:.3}"));
    }
    Ok(parts.join("; "))
}

fn random_rows(n: usize, dim: usize, channels: usize, rng: &mut ChaCha8Rng) -> Vec<DatasetRow> {
    (0..n)
        .map(|_| DatasetRow {
            features: (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            label: rng.random_range(0..channels),
        })
        .collect()
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut model = FcnnModel::init(16, 3, 11).map_err(|e| e.to_string())?;
    model.l1_lambda = 1e-3;
    let rows = random_rows(8, 16, 3, &mut rng);
    let p = model.params_f64();
    let analytic = model.gradient(&p, &rows);
    // smaller than the distance of any weight to the L1 kink at zero
    let eps = 1e-4;
    let mut worst: f64 = 0.0;
    let mut probe = p.clone();
    for k in 0..p.len() {
        probe[k] = p[k] + eps;
        let up = model.objective(&probe, &rows);
        probe[k] = p[k] - eps;
        let down = model.objective(&probe, &rows);
        probe[k] = p[k];
        let numeric = (up - down) / (2.0 * eps);
        let scale = analytic[k].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[k] - numeric).abs() / scale);
    }
    ensure(worst < 1e-4, format!("max relative error {worst:e}"))?;
    Ok(format!("{} parameters, max relative error {worst:.2e}", p.len()))
}

fn expected_flat_size(dim: usize, channels: usize) -> usize {
    16 + 4 * ((dim + 1) * HIDDEN + (HIDDEN + 1) * HIDDEN + (HIDDEN + 1) * channels)
}

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for k in 0..100u64 {
        let dim = rng.random_range(1..=64);
        let channels = rng.random_range(2..=9);
        let model = FcnnModel::init(dim, channels, k).map_err(|e| e.to_string())?;
        let bytes = export_flat(&model).map_err(|e| e.to_string())?;
        let back = import_flat(&bytes).map_err(|e| e.to_string())?;
        let same = model.params().iter().zip(back.params()).all(|(a, b)| a.to_bits() == b.to_bits())
            && model.params().len() == back.params().len()
            && (back.input_dim(), back.channels()) == (dim, channels);
        ensure(same, format!("model {k}: flat round trip differs"))?;
        let text = export_c_array(&model, "hopping_model").map_err(|e| e.to_string())?;
        ensure(parse_c_array(&text).map_err(|e| e.to_string())? == bytes, format!("model {k}: C array differs"))?;
    }
    let dim = 40;
    for f in 2..=9 {
        let model = FcnnModel::zeros(dim, f).map_err(|e| e.to_string())?;
        let len = export_flat(&model).map_err(|e| e.to_string())?.len();
        ensure(
            len == expected_flat_size(dim, f) && len == flat_size(dim, f),
            format!("F={f}: {len} bytes, expected {}", expected_flat_size(dim, f)),
        )?;
    }
    let growth = flat_size(dim, 9) - flat_size(dim, 2);
    ensure(growth == 7 * (HIDDEN + 1) * 4, format!("F=2..9 growth {growth} bytes"))?;
    Ok(format!("100 models bit-exact, F=2..9 sizes {}..{} bytes", flat_size(dim, 2), flat_size(dim, 9)))
}

fn recommender_study() -> Outcome {
    let started = Instant::now();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = study(&StudyConfig::default(), jobs).map_err(|e| e.to_string())?;
    let first = &report.levels[0];
    ensure(first.sparsity_pct == 10, "first level is not 10%")?;
    for (r, acc) in first.per_class_accuracy.iter().enumerate() {
        let acc = acc.ok_or(format!("rating {} never hidden", r + 1))?;
        ensure(acc >= 0.85, format!("rating {} accuracy {acc:.3} at 10%", r + 1))?;
    }
    let means: Vec<f64> = report.levels.iter().map(|l| l.mean_class_accuracy.unwrap_or(0.0)).collect();
    for (w, l) in means.windows(2).zip(&report.levels[1..]) {
        ensure(w[1] <= w[0] + 0.03, format!("mean accuracy rises to {:.3} at {}%", w[1], l.sparsity_pct))?;
    }
    let secs = within_time(started, Duration::from_secs(180))?;
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    Ok(format!("mean class accuracy {} over 10..90%, {secs:.1}s", shown.join(" ")))
}

/// Bytes of every file under `root` except run manifests.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if !path.to_string_lossy().ends_with(".manifest.json") {
                let rel = path.strip_prefix(root).expect("under root").to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    out
}

fn cli_determinism() -> Outcome {
    let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let scenario = assets.join("scenarios/three_nodes.json");
    let sim = assets.join("configs/simulate_shared.json");
    let (scenario, sim) = (scenario.to_string_lossy(), sim.to_string_lossy());
    let commands: Vec<Vec<&str>> = vec![
        vec!["optimize", "--scenario", &scenario, "--out", "solve.json"],
        vec!["simulate", "--config", &sim, "--out", "sim.json"],
        vec!["simulate", "--config", &sim, "--out", "events.csv", "--seed", "3"],
        vec!["gen-dataset", "--rows", "600", "--seed", "5", "--out", "ds.json"],
        vec!["train", "--dataset", "ds.json", "--epochs", "30", "--seed", "5", "--out", "m.fhop"],
        vec!["export", "--model", "m.fhop", "--format", "flat", "--out", "copy.fhop"],
        vec!["export", "--model", "m.fhop", "--format", "c-array", "--out", "m.h"],
        vec!["pipeline", "--out", "ws", "--seed", "7"],
        vec!["recommend", "synth", "--seed", "2", "--out", "full.csv"],
        vec!["recommend", "study", "--sparsities", "10,50,90", "--seeds", "2", "--jobs", "3", "--out", "ws/study.json"],
        vec!["figdata", "--workspace", "ws"],
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        for args in &commands {
            lorahop(dir.path(), args)?;
        }
        // impute needs a sparse matrix; hide every third rating of the synthetic one
        let full = std::fs::read_to_string(dir.path().join("full.csv")).map_err(|e| e.to_string())?;
        let sparse: String = full
            .lines()
            .enumerate()
            .map(|(i, line)| {
                let cells: Vec<&str> = line
                    .split(',')
                    .enumerate()
                    .map(|(j, v)| if (i + j) % 3 == 1 { "" } else { v })
                    .collect();
                cells.join(",") + "\n"
            })
            .collect();
        std::fs::write(dir.path().join("sparse.csv"), sparse).map_err(|e| e.to_string())?;
        lorahop(dir.path(), &["recommend", "impute", "--in", "sparse.csv", "--k", "20", "--out", "imputed.csv"])?;
        runs.push(snapshot(dir.path()));
    }
    ensure(runs[0].keys().eq(runs[1].keys()), "runs produced different file sets")?;
    for (name, bytes) in &runs[0] {
        ensure(runs[1][name] == *bytes, format!("{name} differs between runs"))?;
    }
    Ok(format!("{} commands, {} output files identical", commands.len() + 1, runs[0].len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("zero collisions when carriers suffice", zero_collisions_with_spare_carriers),
        ("trace fidelity", trace_fidelity),
        ("predictor vs random hopping", predictor_beats_random),
        ("channel prediction accuracy", prediction_accuracy),
        ("gradient check", gradient_check),
        ("serialization", serialization),
        ("collaborative filtering study", recommender_study),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
