use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autotsf"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["generate", "--seed", "0", "--out", "d"])), 0);
    assert_eq!(code(&run(dir.path(), &["search", "--data", "d", "--budget", "2"])), 2);
}

#[test]
fn out_of_range_hyperparameter_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "0", "--out", "d"]);
    let out = run(dir.path(), &["train", "--seed", "0", "--data", "d", "--alpha", "0.9"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["search", "--bogus"])), 2);
}

#[test]
fn budget_one_writes_one_trajectory_line() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "4", "--out", "d"]);
    let out = run(dir.path(), &[
        "search", "--seed", "4", "--data", "d", "--family", "linear", "--budget", "1", "--out", "s",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lines = std::fs::read_to_string(dir.path().join("s/trajectory.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 1);
    let plot = std::fs::read_to_string(dir.path().join("s/plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 2);
}

#[test]
fn pv_generation_is_recorded_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["generate", "--seed", "1", "--kind", "pv", "--out", "d"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("d/manifest.json")).unwrap();
    assert!(manifest.contains("pv"));
}

#[test]
fn predict_writes_one_row_per_test_step() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "2", "--out", "d"]);
    let out = run(dir.path(), &["train", "--seed", "2", "--data", "d", "--family", "linear", "--out", "m"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(dir.path(), &["predict", "--model", "m", "--data", "d", "--out", "f"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("f/forecast.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
}

#[test]
fn compare_rejects_mismatched_seed_sets() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "3", "--out", "d"]);
    for (seed, out) in [("3", "a/1"), ("5", "a/2"), ("3", "b/1")] {
        let o = run(dir.path(), &["train", "--seed", seed, "--data", "d", "--family", "linear", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&run(dir.path(), &["compare", "a", "b", "--out", "c"])), 2);
}

#[test]
fn vanilla_runs_without_source_tasks() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "0", "--out", "d"]);
    for entry in std::fs::read_dir(dir.path().join("d")).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap().to_string_lossy().starts_with("train_") {
            std::fs::remove_file(path).unwrap();
        }
    }
    let out = run(dir.path(), &["train", "--seed", "0", "--data", "d", "--family", "linear", "--vanilla", "--out", "v"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("v/report.json").exists());
}

#[test]
fn linear_search_of_fifty_fits_the_time_budget() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "0", "--out", "d"]);
    let start = std::time::Instant::now();
    let out = run(dir.path(), &["search", "--seed", "0", "--data", "d", "--family", "linear", "--budget", "50", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed().as_secs() < 180);
}

#[test]
fn compare_with_itself_is_a_null_result() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["generate", "--seed", "0", "--out", "d"]);
    for seed in ["1", "2", "3"] {
        let o = run(dir.path(), &["train", "--seed", seed, "--data", "d", "--family", "linear", "--out", &format!("a/{seed}")]);
        assert_eq!(code(&o), 0);
    }
    let out = run(dir.path(), &["compare", "a", "a", "--out", "c"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/comparison.json")).unwrap()).unwrap();
    let pair = &report["pairs"][0];
    assert_eq!(pair["p_value"].as_f64(), Some(1.0), "{report}");
    assert_eq!(pair["a12"].as_f64(), Some(0.5), "{report}");
}
