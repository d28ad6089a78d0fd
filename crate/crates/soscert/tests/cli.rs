//! The installed binary, driven through its command line.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn soscert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soscert")).args(args).output().expect("binary runs")
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_cert_accepts_and_rejects() {
    let poly = fixture("worked_example.poly");
    let out = soscert(&["check-cert", path(&poly), path(&fixture("worked_example.cert"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok: 2 squares\n");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cert");
    let text = std::fs::read_to_string(fixture("worked_example.cert")).unwrap().replacen("1/5", "1/4", 1);
    std::fs::write(&bad, text).unwrap();
    let out = soscert(&["check-cert", path(&poly), path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rejected: residual"));
}

#[test]
fn emit_lean_matches_golden() {
    let out = soscert(&["emit-lean", path(&fixture("worked_example.poly")), path(&fixture("worked_example.cert"))]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(fixture("worked_example.lean")).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), golden);
}

#[test]
fn score_reports_a_perfect_response() {
    let dir = tempfile::tempdir().unwrap();
    let response = dir.path().join("response.txt");
    let sos = std::fs::read_to_string(fixture("worked_example.sos")).unwrap();
    std::fs::write(&response, format!("Reasoning omitted.\n<SOS Expression>: {}", sos.trim())).unwrap();
    let out = soscert(&["score", path(&fixture("worked_example.poly")), path(&response)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["r_fmt"], 1.0);
    assert_eq!(v["r_acc"], 1.0);
    assert_eq!(v["sdr"], 0.0);
    assert_eq!(v["total"], 1.0);
    assert!(v["format_error"].is_null());

    std::fs::write(&response, "no delimiter here").unwrap();
    let out = soscert(&["score", path(&fixture("worked_example.poly")), path(&response)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["r_fmt"], 0.0);
    assert!(v["theta"].is_null());
    assert!(v["format_error"].is_string());
}

#[test]
fn solve_with_replay_proves_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = soscert(&[
        "solve",
        path(&fixture("worked_example.poly")),
        "--replay",
        path(&fixture("worked_example.sos")),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "worked_example");
    assert_eq!(row[3], "proved");
    let cert = std::fs::read_to_string(dir.path().join("certs/worked_example.cert")).unwrap();
    assert_eq!(cert, std::fs::read_to_string(fixture("worked_example.cert")).unwrap());
    assert!(dir.path().join("lean/worked_example.lean").exists());
}

#[test]
fn exhausted_deadline_exits_three() {
    let out = soscert(&["solve", path(&fixture("robinson.poly")), "--timeout", "0.3", "--budget", "64"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\ttimeout\t"));
}

#[test]
fn non_sos_target_exits_one() {
    let out = soscert(&["solve", path(&fixture("robinson.poly")), "--budget", "2", "--timeout", "60"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_then_bench() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = soscert(&["gen", "--out", path(&corpus), "--count", "6", "--max-nvars", "2", "--max-half-degree", "1", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(corpus.join("problems")).unwrap().count(), 6);

    let report = dir.path().join("report");
    let out = soscert(&["bench", path(&corpus), "--out", path(&report), "--timeout", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let tsv = std::fs::read_to_string(report.join("report.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 7);
    assert!(tsv.lines().skip(1).all(|l| l.split('\t').nth(3) == Some("proved")), "{tsv}");
    assert!(report.join("timings.tsv").exists() && report.join("summary.txt").exists());
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(soscert(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(soscert(&["solve"]).status.code(), Some(2));
    assert_eq!(soscert(&["solve", "/nonexistent.poly"]).status.code(), Some(2));
    assert_eq!(soscert(&["gen", "--out", "/tmp/x", "--min-nvars", "3", "--max-nvars", "2"]).status.code(), Some(2));
    let poly = fixture("worked_example.poly");
    assert_eq!(soscert(&["solve", path(&poly), "--budget", "0"]).status.code(), Some(2));
    assert_eq!(soscert(&["--help"]).status.code(), Some(0));
}
