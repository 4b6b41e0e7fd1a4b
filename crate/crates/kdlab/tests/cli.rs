use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kdlab::ResultFile;
use tempfile::TempDir;

fn kdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdlab")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

const AP8: &str = r#"{"kind": "ap", "schema_version": 1, "n": 8, "shift": 3}"#;
const ZERO_DIAGONAL: &str =
    r#"{"kind": "explicit", "schema_version": 1, "cost": [[0, 1], [1, 0]], "mu": [0.5, 0.5], "nu": [0.5, 0.5]}"#;

#[test]
fn ap_primal_costs_one() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ap.json", AP8);
    let out = dir.path().join("result.json");
    let o = kdlab(&["solve", s(&inst), "--problem", "primal", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("primal value: 1"), "{}", stdout(&o));
    let r = ResultFile::read(&out).unwrap();
    let report = r.report.unwrap();
    assert!((report.primal_value.0 - 1.0).abs() < 1e-12);
    assert!(r.certificate.unwrap().certified);
}

#[test]
fn zero_diagonal_and_full_relaxation_cost_nothing() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "diag.json", ZERO_DIAGONAL);
    for problem in ["primal", "dual", "partial:1"] {
        let o = kdlab(&["solve", s(&inst), "--problem", problem]);
        assert!(o.status.success(), "{problem}: {}", stderr(&o));
        let r = ResultFile::parse(&stdout(&o), Path::new("stdout")).unwrap();
        let report = r.report.unwrap();
        let value = if problem == "dual" { report.dual_value.0 } else { report.primal_value.0 };
        assert!(value.abs() < 1e-12, "{problem}: {value}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let blocked = write(
        &dir,
        "blocked.json",
        r#"{"kind": "explicit", "schema_version": 1, "cost": [["inf", "inf"], [0, 0]], "mu": [0.5, 0.5], "nu": [0.5, 0.5]}"#,
    );
    assert_eq!(kdlab(&["solve", s(&blocked)]).status.code(), Some(2));

    let o = kdlab(&["solve", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));

    let bad = write(&dir, "bad.json", "{\n  \"kind\": \"ap\",\n  \"n\": ,\n}");
    let o = kdlab(&["solve", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let unknown = write(&dir, "unknown.json", r#"{"kind": "ap", "schema_version": 1, "n": 8, "shift": 3, "size": 2}"#);
    assert_eq!(kdlab(&["solve", s(&unknown)]).status.code(), Some(1));

    let ap = write(&dir, "ap.json", AP8);
    assert_eq!(kdlab(&["solve", s(&ap), "--problem", "partial:2"]).status.code(), Some(1));
    assert_eq!(kdlab(&["solve", s(&ap), "--max-iter", "1"]).status.code(), Some(3));
    assert_eq!(kdlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kdlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn epsilon_primal_sweep_csv() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "diag.json", ZERO_DIAGONAL);
    let o = kdlab(&["sweep", s(&inst), "--sweep", "epsilon-primal", "--grid", "0.5,0.25,0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("parameter,value,iterations,wall_ms\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    let params: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(params, ["0.5", "0.25", "0.1", "0"]);
    let limit: f64 = rows[3][1].parse().unwrap();
    assert!(limit.abs() < 1e-6);
    assert!(stderr(&o).contains("wall time"));
}

#[test]
fn epsilon_dual_sweep_reaches_the_restricted_value() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ex33.json", r#"{"kind": "ex33", "schema_version": 1, "n": 48, "shift": "auto-golden"}"#);
    let out = dir.path().join("sweep.csv");
    let o = kdlab(&["sweep", s(&inst), "--sweep", "epsilon-dual", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 5);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values[..4].windows(2).all(|w| w[1] <= w[0]));

    let o = kdlab(&["solve", s(&inst), "--problem", "restricted"]);
    let restricted = ResultFile::parse(&stdout(&o), Path::new("stdout")).unwrap().report.unwrap().primal_value.0;
    assert!((values[4] - restricted).abs() <= 1e-5, "{} vs {restricted}", values[4]);
}

#[test]
fn n_scaling_json_is_nonincreasing() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ex33.json", r#"{"kind": "ex33", "schema_version": 1, "n": 24, "shift": "auto-golden"}"#);
    let out = dir.path().join("scaling.json");
    let o = kdlab(&["sweep", s(&inst), "--sweep", "n-scaling", "--grid", "24,48,96", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = ResultFile::read(&out).unwrap().sweep.unwrap();
    assert_eq!(sweep.rows.iter().map(|r| r.parameter).collect::<Vec<_>>(), [24.0, 48.0, 96.0]);
    assert!(sweep.monotone);
    assert!(sweep.extrapolated_limit.is_none());
}

#[test]
fn diagnostics_tables() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "gen.json", "");
    let o = kdlab(&["gen", "explicit", "--n", "5", "--seed", "3", "--out", s(&inst)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = kdlab(&["diagnose", s(&inst), "--diag", "ccm"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][0], "true");
    assert_eq!(rows[0][8], "true");

    let ap = dir.path().join("ap24.json");
    assert!(kdlab(&["gen", "ap", "--n", "24", "--out", s(&ap)]).status.success());
    let o = kdlab(&["diagnose", s(&ap), "--diag", "bound"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2 * 23);
    assert!(rows.iter().all(|r| r[4] == "true"));

    let ex33 = dir.path().join("ex33.json");
    assert!(kdlab(&["gen", "ex33", "--n", "24", "--out", s(&ex33)]).status.success());
    let o = kdlab(&["diagnose", s(&ex33), "--diag", "singular", "--delta-grid", "0.1,0.01"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.iter().filter(|r| r[0] == "profile").count(), 2 * 2);
    assert_eq!(rows.last().unwrap()[0], "estimate");
    assert_eq!(kdlab(&["diagnose", s(&ex33), "--diag", "bound"]).status.code(), Some(1));
}

#[test]
fn solve_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("gen.json");
    assert!(kdlab(&["gen", "explicit", "--n", "6", "--seed", "11", "--out", s(&inst)]).status.success());
    let a = stdout(&kdlab(&["solve", s(&inst), "--problem", "relaxed-dual:0.01"]));
    let b = stdout(&kdlab(&["solve", s(&inst), "--problem", "relaxed-dual:0.01"]));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
