//! End-to-end checks of the command-line interface: the four subcommands
//! chained over temp directories, plus exit codes and the error JSON shape.

use std::path::Path;
use std::process::{Command, Output};

fn handret(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handret"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn full_pipeline_over_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs");
    let records = dir.path().join("records");
    let metrics = dir.path().join("metrics.json");
    let csv = dir.path().join("table.csv");
    let demos = dir.path().join("demos.jsonl");

    // synth: small fast set.
    let out = handret(&[
        "synth",
        "--n",
        "2",
        "--sigma",
        "0.006",
        "--seed",
        "5",
        "--out",
        &path_str(&inputs),
    ]);
    assert!(out.status.success(), "synth failed: {}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<_> = std::fs::read_dir(&inputs).unwrap().collect();
    assert_eq!(files.len(), 2);

    // retarget in hybrid mode with demo export.
    let out = handret(&[
        "retarget",
        "--mode",
        "hybrid",
        "--input",
        &path_str(&inputs),
        "--out",
        &path_str(&records),
        "--seed",
        "3",
        "--demos",
        &path_str(&demos),
    ]);
    assert!(out.status.success(), "retarget failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(demos.exists());

    // eval.
    let out = handret(&["eval", "--records", &path_str(&records), "--out", &path_str(&metrics)]);
    assert!(out.status.success(), "eval failed: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(doc["trajectories"].as_array().unwrap().len(), 2);
    assert!(doc["aggregate"]["success_rate"].is_number());

    // report.
    let out = handret(&[
        "report",
        "--metrics",
        &path_str(&metrics),
        "--csv",
        &path_str(&csv),
    ]);
    assert!(out.status.success(), "report failed: {}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("mode,task_weight,swarm,iterations,success_rate,lifting_ratio"));
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn failures_emit_error_json_and_nonzero_exit() {
    let out = handret(&["eval", "--records", "/nonexistent/records", "--out", "/tmp/x.json"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    let doc: serde_json::Value = serde_json::from_str(line).expect("stderr ends with error JSON");
    assert!(doc["error"]["kind"].is_string());
    assert!(doc["error"]["message"].is_string());
}

#[test]
fn bad_mode_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = handret(&[
        "retarget",
        "--mode",
        "annealing",
        "--input",
        &path_str(dir.path()),
        "--out",
        &path_str(dir.path()),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let doc: serde_json::Value =
        serde_json::from_str(stderr.lines().last().unwrap_or_default()).unwrap();
    assert_eq!(doc["error"]["kind"], "config");
}
