use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ngme(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngme"))
        .args(args)
        .current_dir(dir)
        .env_remove("NGME_LEDGER")
        .output()
        .expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = ngme(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn ghz_bound_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let b = ok_json(dir.path(), &["bound", "--family", "ghz", "--n", "3", "--d", "2", "--a", "0.707,0.707"]);
    assert_eq!(b["value"].as_f64().unwrap(), 0.5);
    assert_eq!(b["method"], "closed-ghz");
    let t = ok_json(dir.path(), &["threshold", "--family", "ghz", "--n", "3"]);
    assert!((t["v_star"].as_f64().unwrap() - 3.0 / 7.0).abs() < 1e-15);
}

#[test]
fn spec_files_and_inline_specs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"family":"dicke","n":3,"d":2,"params":{"k":1},"noise":{"kind":"white","v":0.9}}"#;
    std::fs::write(dir.path().join("s.json"), spec).unwrap();
    let a = ngme(dir.path(), &["witness", "--spec", spec]);
    let b = ngme(dir.path(), &["witness", "--spec", "s.json"]);
    let c = ngme(dir.path(), &["witness", "--family", "dicke", "--n", "3", "--k", "1", "--v", "0.9"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let w: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(w["verdict"], "certified-ngme");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| ngme(dir.path(), args).status.code();
    assert_eq!(code(&["bound", "--family", "ghz", "--n", "3", "--bogus"]), Some(2));
    assert_eq!(code(&["bound", "--family", "nope", "--n", "3"]), Some(2));
    assert_eq!(code(&["bound", "--spec", r#"{"family":"ghz","n":3,"extra":0}"#]), Some(2));
    assert_eq!(code(&["bound", "--spec", r#"{"family":"ghz","n":3,"params":{"k":2}}"#]), Some(2));
    assert_eq!(code(&["bound", "--family", "dicke", "--n", "3", "--k", "9"]), Some(2));
    assert_eq!(code(&["bound", "--family", "ghz", "--n", "13"]), Some(3));
    assert_eq!(code(&["sweep", "--scenario", "ghz", "--grid", "theta=0:1:1000", "--grid", "v=0:1:1000"]), Some(3));
    assert_eq!(code(&["bound", "--spec", "missing.json"]), Some(1));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn verify_writes_one_ledger_entry() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = ngme(dir.path(), &["ledger"]);
    assert_eq!(fresh.status.code(), Some(0));
    assert!(stdout(&fresh).starts_with("0 discrepancies"));

    let v = ok_json(dir.path(), &["verify", "--family", "dicke", "--n", "4", "--k", "2", "--d", "2"]);
    assert!((v["oracle"]["best_overlap"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert_eq!(v["record"]["verdict"], "known-inapplicable");
    let summary = stdout(&ngme(dir.path(), &["ledger"]));
    assert!(summary.starts_with("1 discrepancies"));
    assert!(summary.contains("bound/dicke/n=4,k=2,d=2"));

    let agree = ok_json(dir.path(), &["verify", "--family", "dicke", "--n", "4", "--k", "1", "--d", "2"]);
    assert_eq!(agree["recorded"], false);
    let v: Value = serde_json::from_slice(&ngme(dir.path(), &["ledger", "--json"]).stdout).unwrap();
    assert_eq!(v["discrepancies"], 1);
}

#[test]
fn scenario_mismatch_is_recorded_and_env_overrides_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.jsonl");
    let out = Command::new(env!("CARGO_BIN_EXE_ngme"))
        .args(["bell", "--scenario", "bipartite", "--axis", "x"])
        .current_dir(dir.path())
        .env("NGME_LEDGER", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("scenario/bipartite/x"));
    assert!(!dir.path().join("ngme-ledger.jsonl").exists());

    ok_json(dir.path(), &["bell", "--scenario", "ghz", "--n", "4", "--theta", "0.3"]);
    assert!(!dir.path().join("ngme-ledger.jsonl").exists());
}

#[test]
fn corrupt_ledger_lines_are_counted() {
    let dir = tempfile::tempdir().unwrap();
    ok_json(dir.path(), &["bell", "--scenario", "bipartite", "--axis", "x"]);
    let path = dir.path().join("ngme-ledger.jsonl");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{oops\n");
    std::fs::write(&path, text).unwrap();
    let out = ngme(dir.path(), &["ledger"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("1 corrupt lines skipped"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn outputs_are_byte_stable() {
    let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let v = ngme(dir.path(), &["verify", "--family", "ghz", "--n", "4", "--a", "0.8,0.6", "--seed", "7", "--restarts", "8"]);
            let s = ngme(dir.path(), &["sweep", "--scenario", "w-depth", "--grid", "n=3:5:3", "--grid", "r=0.5,1,2"]);
            (v.stdout, s.stdout)
        })
        .collect();
    assert!(!runs[0].0.is_empty() && !runs[0].1.is_empty());
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn sweep_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = ngme(
        dir.path(),
        &["sweep", "--scenario", "ghz-depth", "--grid", "n=3:6:4", "--grid", "theta=0.01:0.785:25", "--output", "s.csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("s.csv")).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(&header[0], "n");
    assert_eq!(&header[1], "theta");
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        rows += 1;
        assert_eq!(rec.get(header.len() - 1), Some("ok"));
        for (name, field) in header.iter().zip(rec.iter()) {
            if ["n", "violated", "min_depth", "status"].contains(&name) || field.is_empty() {
                continue;
            }
            let x: f64 = field.parse().unwrap();
            if x.is_finite() {
                assert_eq!(format!("{x:.16e}"), field);
            }
        }
        // pipeline against printed for this family
        let pipeline: f64 = rec[2].parse().unwrap();
        let printed: f64 = rec[3].parse().unwrap();
        assert!((pipeline - printed).abs() < 1e-9);
    }
    assert_eq!(rows, 100);
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = ngme(dir.path(), &["sweep", "--scenario", "ghz", "--grid", "theta=0:1:0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1);
    assert!(stdout(&out).starts_with("theta,pipeline,printed"));
}

#[test]
fn critical_noise_sweep_is_monotone_in_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = ngme(dir.path(), &["sweep", "--scenario", "werner-ghz", "--grid", "n=3:6:4", "--quantity", "critical-noise"]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let v: Vec<f64> = r.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(v.len(), 4);
    assert!(v.windows(2).all(|w| w[1] > w[0]));
    assert!((v[0] - 0.802357).abs() < 1e-6);
}

#[test]
fn suite_reports_known_conflicts_only() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(dir.path(), &["verify", "--suite"]);
    let claims: Vec<&str> = v["discrepancies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["claim_ref"].as_str().unwrap())
        .collect();
    for known in ["scenario/bipartite/x", "scenario/w", "threshold/cluster5"] {
        assert!(claims.iter().any(|c| c.starts_with(known)), "{known} missing from {claims:?}");
    }
    assert!(v["surprises"].as_array().unwrap().is_empty(), "{}", v["surprises"]);
    let summary = stdout(&ngme(dir.path(), &["ledger"]));
    assert!(summary.starts_with(&format!("{} discrepancies", claims.len())));
}
