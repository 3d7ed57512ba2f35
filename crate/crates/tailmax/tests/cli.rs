//! CLI behavior: flag validation, exit codes, and reproducibility of the
//! estimation artifacts.

use std::io::Write;
use std::process::Command;

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tailmax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled_csv() -> String {
    format!("{}/data/synthetic_prices.csv", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn rejects_invalid_q() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "estimate",
        "--input", &bundled_csv(),
        "--col-x", "asset_a",
        "--col-y", "asset_b",
        "--q", "0",
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q"));
}

#[test]
fn missing_column_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "estimate",
        "--input", &bundled_csv(),
        "--col-x", "nope",
        "--col-y", "asset_b",
        "--q", "0.1",
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn empty_selection_names_q_and_counts() {
    // a tiny file so the diagonal square at small q is empty
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tiny.csv");
    let mut f = std::fs::File::create(&csv).unwrap();
    writeln!(f, "date,a,b").unwrap();
    for (i, v) in [100.0, 101.0, 99.0, 102.0, 98.0, 103.0].iter().enumerate() {
        writeln!(f, "2020-01-{:02},{v},{}", i + 1, v * 2.0).unwrap();
    }
    let out = run_cli(&[
        "estimate",
        "--input", csv.to_str().unwrap(),
        "--col-x", "a",
        "--col-y", "b",
        "--q", "0.01",
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0.01"), "{err}");
}

#[test]
fn whitenoise_reports_minimum_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "whitenoise",
        "--input", &bundled_csv(),
        "--col-x", "asset_a",
        "--col-y", "asset_b",
        "--q", "0.05",
        "--max-lag", "20",
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("max_lag"), "{err}");
}

#[test]
fn estimate_is_reproducible_and_negation_changes_it() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..3 {
        let out = dir.path().join(format!("r{run}"));
        let mut args = vec![
            "estimate".to_string(),
            "--input".into(), bundled_csv(),
            "--col-x".into(), "asset_a".into(),
            "--col-y".into(), "asset_b".into(),
            "--q".into(), "0.1".into(),
            "--seed".into(), "9".into(),
            "--out".into(), out.display().to_string(),
        ];
        if run == 2 {
            args.push("--negate-returns".into());
        }
        let st = Command::new(env!("CARGO_BIN_EXE_tailmax"))
            .args(&args)
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        outputs.push(std::fs::read(out.join("estimate.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "same seed must be byte-identical");
    assert_ne!(outputs[0], outputs[2], "negated returns must change the estimate");
}

#[test]
fn gof_direction_below_gives_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let st = run_cli(&[
        "gof",
        "--input", &bundled_csv(),
        "--col-x", "asset_a",
        "--col-y", "asset_b",
        "--q", "0.1",
        "--direction", "below",
        "--resamples", "200",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("gof.json")).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    let bad = run_cli(&[
        "gof",
        "--input", &bundled_csv(),
        "--col-x", "asset_a",
        "--col-y", "asset_b",
        "--q", "0.1",
        "--direction", "sideways",
        "--out", dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(run);
        let st = run_cli(&[
            "simulate",
            "--gamma0", "0.4",
            "--gamma1", "0.2",
            "--n", "10000",
            "--reps", "4",
            "--q", "0.1",
            "--seed", "3",
            "--threads", threads,
            "--out", out.to_str().unwrap(),
        ]);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        files.push(std::fs::read(out.join("replications.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
