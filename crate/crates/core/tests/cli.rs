use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn nctlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nctlab")).args(args).output().expect("spawn nctlab")
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = nctlab(&["verify", "--filter", "chern-homogeneous", "--out", out]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let rows = report.as_array().unwrap();
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r["pass"] == Value::Bool(true) && r["name"] == "chern-homogeneous"));
}

#[test]
fn verify_text_report_and_failure_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    fs::write(&cfg, "# impossible tolerance\ntol.weyl-law = 1e-300\n").unwrap();
    let out = dir.path().join("out");
    let run = nctlab(&[
        "verify",
        "--filter",
        "weyl-*",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(run.status.code(), Some(1));
    let text = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.contains("FAIL") && text.contains("1 checks, 0 passed, 1 failed"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(nctlab(&["verify", "--filter", "no-such-check"]).status.code(), Some(2));
    assert_eq!(nctlab(&["verify", "--format", "xml", "--filter", "weyl-law"]).status.code(), Some(2));
    assert_eq!(nctlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(nctlab(&["dump-section", "--p", "1", "--tau", "0", "--grid", "4"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "sweep.theta = 1.5\n").unwrap();
    assert_eq!(nctlab(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn chern_prints_record_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("omega.csv");
    let run = nctlab(&["chern", "--p", "2", "--grid", "64", "--field", field.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let rec: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(rec["p"], 2);
    assert_eq!(rec["grid"], 64);
    assert!((rec["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(rec["est_error"].as_f64().unwrap() < 1e-9);
    let csv = fs::read_to_string(field).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,omega_im"));
    assert_eq!(csv.lines().count(), 64 * 64 + 1);
}

#[test]
fn dump_section_csv() {
    let run = nctlab(&["dump-section", "--p", "2", "--tau", "0,1.3", "--theta", "0.3", "--grid", "8"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,re,im"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r.len() == 4 && r.iter().all(|v| v.is_finite())));
    assert!((rows[63][1] - 1.3 * 7.0 / 8.0).abs() < 1e-12);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let run = nctlab(&["verify", "--filter", "q*", "--seed", "11", "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(0));
        reports.push(fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let run = nctlab(&["verify", "--filter", "rational-center", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let got = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let want = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/rational_center_seed7.json")).unwrap();
    assert_eq!(got, want);
}
