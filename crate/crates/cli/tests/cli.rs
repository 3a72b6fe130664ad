//! End-to-end checks of the binary: exit codes, file contracts and
//! determinism of individual subcommands.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridrisk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Small-grid overrides shared by the tests.
const SMALL: &[&str] = &[
    "--set",
    "grid.n_rows=2",
    "--set",
    "grid.n_cols=2",
    "--set",
    "synth.n_days=10",
    "--set",
    "synth.base_rate=1.0",
    "--set",
    "synth.hotspots=none",
];

fn synth_and_ingest(dir: &Path) -> (String, String) {
    let events = dir.join("events.csv").to_string_lossy().into_owned();
    let cube = dir.join("data.cube").to_string_lossy().into_owned();
    let mut args = vec!["synth", "--out", &events];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 0);
    let mut args = vec!["ingest", "--input", &events, "--out", &cube];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 0);
    (events, cube)
}

#[test]
fn synth_same_seed_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let out = out.to_string_lossy().into_owned();
        let mut args = vec!["synth", "--out", &out, "--seed", "7"];
        args.extend_from_slice(SMALL);
        assert_code(&run(&args), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(std::fs::read_to_string(&a).unwrap().lines().count() > 1);
}

#[test]
fn synth_different_seed_differs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        let out = out.to_string_lossy().into_owned();
        let mut args = vec!["synth", "--out", &out, "--seed", seed];
        args.extend_from_slice(SMALL);
        assert_code(&run(&args), 0);
    }
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn ingest_reports_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let (events, cube) = synth_and_ingest(dir.path());
    let event_lines = std::fs::read_to_string(&events).unwrap().lines().count() - 1;
    // re-run ingest to capture stdout
    let mut args = vec!["ingest", "--input", &events, "--out", &cube];
    args.extend_from_slice(SMALL);
    let out = run(&args);
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains(&format!("total={event_lines}")),
        "summary missing total: {stdout}"
    );
    assert!(stdout.contains("dropped=0"), "{stdout}");
}

#[test]
fn ingest_strict_rejects_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "timestamp,lon,lat\nnot-a-time,1.0,2.0\n").unwrap();
    let csv_s = csv.to_string_lossy().into_owned();
    let cube = dir.path().join("bad.cube").to_string_lossy().into_owned();

    let mut args = vec!["ingest", "--input", &csv_s, "--out", &cube, "--strict"];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 2);

    // non-strict skips with a warning and succeeds
    let mut args = vec!["ingest", "--input", &csv_s, "--out", &cube];
    args.extend_from_slice(SMALL);
    let out = run(&args);
    assert_code(&out, 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}

#[test]
fn ingest_empty_body_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "timestamp,lon,lat\n").unwrap();
    let csv_s = csv.to_string_lossy().into_owned();
    let cube = dir.path().join("empty.cube").to_string_lossy().into_owned();
    let mut args = vec!["ingest", "--input", &csv_s, "--out", &cube];
    args.extend_from_slice(SMALL);
    let out = run(&args);
    assert_code(&out, 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("all zero"));
}

#[test]
fn analyze_writes_the_five_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cube) = synth_and_ingest(dir.path());
    let out_dir = dir.path().join("analysis");
    let out_dir_s = out_dir.to_string_lossy().into_owned();
    let mut args = vec![
        "analyze", "--cube", &cube, "--out-dir", &out_dir_s, "--max-k", "3", "--max-tau", "48",
    ];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 0);
    for name in [
        "heatmap.csv",
        "heatmap.pgm",
        "contour.csv",
        "period_profile.csv",
        "hourly_counts.csv",
    ] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    assert!(out_dir.join("resolved.cfg").exists());

    // contour re-parses: header + max_tau+1 rows, k columns
    let contour = std::fs::read_to_string(out_dir.join("contour.csv")).unwrap();
    let lines: Vec<&str> = contour.lines().collect();
    assert_eq!(lines.len(), 1 + 49);
    assert_eq!(lines[0], "tau,0,1,2,3");
}

#[test]
fn unknown_config_key_is_usage_error() {
    let out = run(&["synth", "--out", "/tmp/never-written.csv", "--set", "nope=1"]);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown configuration key"));
}

#[test]
fn bad_split_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cube) = synth_and_ingest(dir.path());
    let out_dir = dir.path().join("run").to_string_lossy().into_owned();
    let mut args = vec![
        "train", "--cube", &cube, "--model", "lasso", "--out-dir", &out_dir,
        "--train-end", "2016-01-09T00:00:00Z", "--test-end", "2016-01-08T00:00:00Z",
    ];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 2);
}

#[test]
fn evaluate_missing_checkpoint_fails_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cube) = synth_and_ingest(dir.path());
    let out_dir = dir.path().join("eval").to_string_lossy().into_owned();
    let missing = dir.path().join("ghost.ckpt").to_string_lossy().into_owned();
    let mut args = vec![
        "evaluate", "--cube", &cube, "--checkpoints", &missing, "--out-dir", &out_dir,
    ];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 2);
}

#[test]
fn train_and_evaluate_small_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cube) = synth_and_ingest(dir.path());
    let run_dir = dir.path().join("run");
    let run_dir_s = run_dir.to_string_lossy().into_owned();
    let risk_flags: &[&str] = &[
        "--set", "risk.window_days=1",
        "--set", "risk.seq_len=6",
        "--set", "model.lstm_sizes=4,4",
        "--set", "model.dense_sizes=8",
        "--set", "arma.p=4",
    ];

    for model in ["tarpml", "lasso", "havg", "arma"] {
        let mut args = vec![
            "train", "--cube", &cube, "--model", model, "--out-dir", &run_dir_s, "--epochs", "2",
        ];
        args.extend_from_slice(SMALL);
        args.extend_from_slice(risk_flags);
        let out = run(&args);
        assert_code(&out, 0);
        assert!(run_dir.join(format!("{model}.ckpt")).exists());
    }
    assert!(run_dir.join("history.csv").exists());
    assert!(run_dir.join("samples.store").exists());

    let eval_dir = dir.path().join("eval");
    let eval_dir_s = eval_dir.to_string_lossy().into_owned();
    let tarpml = run_dir.join("tarpml.ckpt").to_string_lossy().into_owned();
    let lasso = run_dir.join("lasso.ckpt").to_string_lossy().into_owned();
    let havg = run_dir.join("havg.ckpt").to_string_lossy().into_owned();
    let arma = run_dir.join("arma.ckpt").to_string_lossy().into_owned();
    let mut args = vec![
        "evaluate", "--cube", &cube, "--checkpoints", &tarpml, &lasso, &havg, &arma,
        "--out-dir", &eval_dir_s,
    ];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(risk_flags);
    let out = run(&args);
    assert_code(&out, 0);

    let table = std::fs::read_to_string(eval_dir.join("comparison.csv")).unwrap();
    assert!(table.starts_with("model,mae,mse,rmse\n"));
    for model in ["tarpml", "lasso", "havg", "arma"] {
        assert!(table.contains(&format!("\n{model},")), "missing row for {model}");
    }
    assert!(eval_dir.join("ordering_report.txt").exists());
    assert!(eval_dir.join("map_real.pgm").exists());
    assert!(eval_dir.join("map_pred_tarpml.csv").exists());
    assert!(eval_dir.join("curve_tarpml.csv").exists());

    // evaluating twice produces identical tables
    let mut args2 = vec![
        "evaluate", "--cube", &cube, "--checkpoints", &tarpml, &lasso, &havg, &arma,
        "--out-dir", &eval_dir_s,
    ];
    args2.extend_from_slice(SMALL);
    args2.extend_from_slice(risk_flags);
    assert_code(&run(&args2), 0);
    let table2 = std::fs::read_to_string(eval_dir.join("comparison.csv")).unwrap();
    assert_eq!(table, table2);
}

#[test]
fn sweep_tiny_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cube) = synth_and_ingest(dir.path());
    let out_dir = dir.path().join("sweep");
    let out_dir_s = out_dir.to_string_lossy().into_owned();
    let mut args = vec![
        "sweep", "--cube", &cube, "--out-dir", &out_dir_s, "--tiny",
        "--lengths", "3,5", "--windows", "1,2",
        "--set", "train.epochs=1",
        "--set", "model.lstm_sizes=3,3",
        "--set", "model.dense_sizes=6",
    ];
    args.extend_from_slice(SMALL);
    let out = run(&args);
    assert_code(&out, 0);
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "window_days,3,5");
    assert_eq!(lines[1].split(',').count(), 3);
    assert_eq!(lines[2].split(',').count(), 3);
}

#[test]
fn resolved_config_written_next_to_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("ev.csv");
    let events_s = events.to_string_lossy().into_owned();
    let mut args = vec!["synth", "--out", &events_s];
    args.extend_from_slice(SMALL);
    assert_code(&run(&args), 0);
    let resolved = dir.path().join("ev.csv.resolved.cfg");
    let text = std::fs::read_to_string(&resolved).unwrap();
    assert!(text.contains("grid.n_rows = 2"));
    assert!(text.contains("synth.n_days = 10"));

    // the resolved file is loadable as a config
    let events2 = dir.path().join("ev2.csv").to_string_lossy().into_owned();
    let resolved_s = resolved.to_string_lossy().into_owned();
    let out = run(&["synth", "--config", &resolved_s, "--out", &events2]);
    assert_code(&out, 0);
    assert_eq!(
        std::fs::read(&events).unwrap(),
        std::fs::read(dir.path().join("ev2.csv")).unwrap()
    );
}
