use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn lorahop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorahop"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scenario(name: &str) -> String {
    assets().join("scenarios").join(name).to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn lone_node_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorahop(dir.path(), &["optimize", "--scenario", &scenario("single_node.json"), "--out", "r.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["objective_value"], 0.0);
    assert_eq!(r["proven_optimal"], true);
    let manifest = read_json(&dir.path().join("r.json.manifest.json"));
    assert_eq!(manifest["command"], "optimize");
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn single_carrier_forces_a_collision() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorahop(dir.path(), &["optimize", "--scenario", &scenario("forced_collision.json"), "--out", "r.json"]);
    assert_eq!(code(&out), 0);
    // both nodes on one carrier: two ordered colliding pairs
    assert_eq!(read_json(&dir.path().join("r.json"))["objective_value"], 2.0);
}

#[test]
fn infeasible_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorahop(dir.path(), &["optimize", "--scenario", &scenario("infeasible.json"), "--out", "r.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"num_nodes\": ").unwrap();
    let out = lorahop(dir.path(), &["optimize", "--scenario", "bad.json", "--out", "r.json"]);
    assert_eq!(code(&out), 2);
    let out = lorahop(dir.path(), &["simulate", "--config", "missing.json", "--out", "s.json"]);
    assert_eq!(code(&out), 2);
    let out = lorahop(dir.path(), &["export", "--model", "bad.json", "--format", "flat", "--out", "m"]);
    assert_eq!(code(&out), 2);
    let out = lorahop(dir.path(), &["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn seed_override_changes_the_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = assets().join("configs/simulate_shared.json");
    let cfg = cfg.to_string_lossy();
    for (seed, name) in [("1", "a.json"), ("2", "b.json")] {
        let out = lorahop(dir.path(), &["simulate", "--config", &cfg, "--seed", seed, "--out", name]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn pipeline_stage_errors_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.json"), r#"{"sim": {"nodes": [{"source": "Z", "strategy": "random_hop"}]}}"#).unwrap();
    let out = lorahop(dir.path(), &["pipeline", "--config", "p.json", "--out", "ws"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage dataset"));
}

#[test]
fn pipeline_then_figdata() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorahop(dir.path(), &["pipeline", "--out", "ws", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ws = dir.path().join("ws");
    let perf = std::fs::read_to_string(ws.join("performance.csv")).unwrap();
    assert_eq!(perf.lines().count(), 1 + 3 * 6 * 2);
    for size in ["30", "74", "118", "162", "206", "250"] {
        assert!(perf.lines().any(|l| l.split(',').nth(1) == Some(size)));
    }
    let cmp = read_json(&ws.join("comparison.json"));
    for row in cmp.as_array().unwrap() {
        assert!(row["pdr_a"].as_f64().unwrap() >= row["pdr_b"].as_f64().unwrap());
    }

    let out = lorahop(dir.path(), &["figdata", "--workspace", "ws", "--out", "figs"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let figs = dir.path().join("figs");
    assert_eq!(std::fs::read_to_string(figs.join("performance.csv")).unwrap(), perf);
    let sizes = std::fs::read_to_string(figs.join("model_size.csv")).unwrap();
    let channels: Vec<&str> = sizes.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(channels, ["2", "3", "4", "5", "6", "7", "8", "9"]);
    assert!(!figs.join("cf_confusion.csv").exists());
}

#[test]
fn figdata_on_empty_workspace_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorahop(dir.path(), &["figdata", "--workspace", "."]);
    assert_eq!(code(&out), 2);
}

#[test]
fn recommend_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.csv"), "5,4,,1\n5,,4,1\n1,1,2,5\n,2,1,5\n").unwrap();
    let out = lorahop(dir.path(), &["recommend", "impute", "--in", "m.csv", "--k", "2", "--out", "full.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let full = std::fs::read_to_string(dir.path().join("full.csv")).unwrap();
    let rows: Vec<Vec<u8>> = full.lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    // row 0 leans on rows 1 (cos 1.0, rates 4) and 3 (cos 0.585, rates 1): 2.89
    assert_eq!(rows[0], [5, 4, 3, 1]);
    // row 3 leans on rows 2 (cos 0.967, rates 1) and 0 (cos 0.585, rates 5): 2.51
    assert_eq!(rows[3], [3, 2, 1, 5]);

    std::fs::write(dir.path().join("bad.csv"), "5,9\n").unwrap();
    let out = lorahop(dir.path(), &["recommend", "impute", "--in", "bad.csv", "--out", "x.csv"]);
    assert_eq!(code(&out), 2);

    let study = ["recommend", "study", "--sparsities", "10,90", "--seeds", "1", "--out", "study.json"];
    assert_eq!(code(&lorahop(dir.path(), &study)), 0);
    let report = read_json(&dir.path().join("study.json"));
    assert_eq!(report["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn train_and_export_agree() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = lorahop(dir.path(), args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["gen-dataset", "--rows", "300", "--out", "ds.json"]);
    run(&["train", "--dataset", "ds.json", "--epochs", "5", "--out", "m.fhop"]);
    run(&["export", "--model", "m.fhop", "--format", "flat", "--out", "copy.fhop"]);
    run(&["export", "--model", "m.fhop", "--format", "c-array", "--symbol", "net", "--out", "m.h"]);
    let flat = std::fs::read(dir.path().join("m.fhop")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("copy.fhop")).unwrap(), flat);
    let header = std::fs::read_to_string(dir.path().join("m.h")).unwrap();
    assert!(header.contains(&format!("net_len = {};", flat.len())));
    let report = read_json(&dir.path().join("m.fhop.train.json"));
    assert_eq!(report["epochs"].as_array().unwrap().len(), 5);

    let out = lorahop(dir.path(), &["export", "--model", "m.fhop", "--format", "c-array", "--symbol", "int", "--out", "x.h"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn three_node_scenario_matches_enumeration() {
    use lorahop::optimizer::{enumerate_oracle, DEFAULT_ALPHA, DEFAULT_BETA};
    use lorahop::problem::Scenario;

    let path = scenario("three_nodes.json");
    let sc = Scenario::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let truth = enumerate_oracle(&sc, DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = lorahop(dir.path(), &["optimize", "--scenario", &path, "--out", "r.json"]);
    assert_eq!(code(&out), 0);
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["objective_value"].as_f64().unwrap(), truth.objective_value);
}
