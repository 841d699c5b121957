use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qrem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrem")).args(args).output().unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(path).unwrap()
}

/// Runs `command` with `config` written to a file in `dir`; returns the output directory.
fn run_config(dir: &Path, tag: &str, command: &str, config: &str) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{tag}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(tag);
    let o = qrem(&[command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    (o, out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn phase_diagram_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd");
    let o = qrem(&["phase-diagram", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("phase.csv")).unwrap();
    assert_eq!(csv, golden("phase.csv"));
    let first: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 0.832555).abs() < 5e-7);
}

#[test]
fn two_level_spectrum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
  "command": "spectrum",
  "spectrum": { "energies": [-0.4, 0.9], "gammas": [0.0, 0.6], "k": 2 }
}"#;
    let (o, out) = run_config(dir.path(), "two", "spectrum", config);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "gamma,level_index,energy,residual");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let (gamma, level, energy) = (row[0], row[1], row[2]);
        let half = (0.9f64 - -0.4) / 2.0;
        let root = (half * half + gamma * gamma).sqrt();
        let exact = 0.25 + if level == 0.0 { -root } else { root };
        assert!((energy - exact).abs() < 1e-12, "Γ = {gamma}: {energy} vs {exact}");
        assert!(row[3] < 1e-10);
    }
    let echo: Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["spectrum"]["n"], 1);
}

#[test]
fn instanton_tables_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst");
    let o = qrem(&["instanton", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("surface_cost.csv")).unwrap(), golden("surface_cost.csv"));
    assert_eq!(fs::read_to_string(out.join("action.csv")).unwrap(), golden("action.csv"));
}

#[test]
fn effective_config_materializes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_config(dir.path(), "g", "gap", r#"{"command": "gap", "gap": {"n": 8}}"#);
    assert!(o.status.success(), "{}", stderr(&o));
    let echo = fs::read_to_string(out.join("config.json")).unwrap();
    let expected = golden("gap_config.json").replace("OUT", out.to_str().unwrap());
    assert_eq!(echo, expected);
    let s = summary(&out);
    assert_eq!(s["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(s["rng_version"], 1);
    assert_eq!(s["converged"], true);
    assert_eq!(s["config_echo"]["gap"]["samples"], serde_json::json!([0]));
    let csv = fs::read_to_string(out.join("gap.csv")).unwrap();
    assert!(csv.starts_with("n,sample,seed,e0,gamma_star,delta_min\n8,0,"));
}

#[test]
fn saved_config_reproduces_scaling_and_anneal_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scaling = r#"{"command": "scaling", "master_seed": 9, "scaling": {"ns": [6, 8], "samples": 10}}"#;
    let (o, first) = run_config(dir.path(), "s1", "scaling", scaling);
    assert!(o.status.success(), "{}", stderr(&o));
    let rerun = dir.path().join("s2");
    let o = qrem(&[
        "scaling",
        "--config",
        first.join("config.json").to_str().unwrap(),
        "--out",
        rerun.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(first.join("scaling.csv")).unwrap();
    assert_eq!(a, fs::read(rerun.join("scaling.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 21);
    assert!(summary(&first)["results"]["fit"]["slope"].is_f64());

    let anneal = r#"{"command": "anneal", "anneal": {"n": 6, "samples": [0, 1], "taus": [0.5, 5.0], "checkpoint_every": 50}}"#;
    let (o, a1) = run_config(dir.path(), "a1", "anneal", anneal);
    assert!(o.status.success(), "{}", stderr(&o));
    let (o, a2) = run_config(dir.path(), "a2", "anneal", anneal);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read(a1.join("anneal.csv")).unwrap();
    assert_eq!(csv, fs::read(a2.join("anneal.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("n,seed,tau,dt,fidelity,norm_drift\n"));
    assert_eq!(text.lines().count(), 5);
    let cp = fs::read_to_string(a1.join("checkpoints/sample1_tau1.csv")).unwrap();
    assert!(cp.starts_with("t,gamma,fidelity\n"));
    assert_eq!(cp, fs::read_to_string(a2.join("checkpoints/sample1_tau1.csv")).unwrap());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"command": "spectrum", "master_seed": 3, "spectrum": {"n": 5, "gammas": [0.5]}}"#;
    let (o, base) = run_config(dir.path(), "base", "spectrum", config);
    assert!(o.status.success());
    let cfg = dir.path().join("base.json");
    let other = dir.path().join("other");
    let o = qrem(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "4"]);
    assert!(o.status.success());
    assert_eq!(summary(&other)["config_echo"]["master_seed"], 4);
    assert_ne!(
        fs::read(base.join("spectrum.csv")).unwrap(),
        fs::read(other.join("spectrum.csv")).unwrap()
    );
}

#[test]
fn invalid_values_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = "{\n  \"command\": \"anneal\",\n  \"anneal\": {\n    \"n\": 6,\n    \"dt_rule\": 0.5\n  }\n}\n";
    let (o, out) = run_config(dir.path(), "bad", "anneal", config);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("bad.json:5: anneal.dt_rule"), "{msg}");
    assert!(!out.exists(), "nothing should be computed or written");
}

#[test]
fn malformed_and_unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_config(dir.path(), "typo", "gap", "{\n  \"command\": \"gap\",\n  \"gap\": {\"nn\": 3}\n}");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo.json:3:"), "{}", stderr(&o));

    let (o, _) = run_config(dir.path(), "syntax", "gap", "{\n  \"command\": \"gap\",\n  \"gap\": {\"n\": }\n}");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax.json:3:"), "{}", stderr(&o));

    let (o, _) = run_config(dir.path(), "mismatch", "spectrum", r#"{"command": "gap"}"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("requested"), "{}", stderr(&o));

    let (o, _) = run_config(dir.path(), "large", "gap", r#"{"command": "gap", "gap": {"n": 40}}"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gap.n"), "{}", stderr(&o));
}

#[test]
fn unconverged_spectrum_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"command": "spectrum", "spectrum": {"n": 12, "gammas": [0.7], "k": 4, "tol": 1e-300}}"#;
    let (o, out) = run_config(dir.path(), "tight", "spectrum", config);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(summary(&out)["converged"], false);
    assert!(out.join("spectrum.csv").exists());
}
