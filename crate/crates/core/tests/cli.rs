use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chemo_core::harness::record::{read_trajectory, Outcome, RunRecord};
use tempfile::TempDir;

const DEMO: &str = r#"
[exponents]
n = 2
gamma = "3/2"
p = 4
q = 2
alpha = "1/2"

[coefficients]
kappa = "0.2"
mu = "mu1 * s^alpha"
mu1 = 1.0

[grid]
cells = 200
radius = 1.0

[initial]
profile = "bump"
amplitude = 2.0

[time]
t_end = 2.0
dt0 = 1e-3
dt_max = 0.05
sample_interval = 0.1
"#;

fn chemo_sim(args: &[&str], paths: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chemo-sim"));
    cmd.args(args);
    for p in paths {
        cmd.arg(p);
    }
    cmd.env("CHEMO_SIM_LOG", "error").output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn simulate(config: &Path, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chemo-sim"));
    cmd.arg("simulate").arg("--config").arg(config).arg("--out").arg(out);
    cmd.output().unwrap()
}

#[test]
fn check_params_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "ok.toml", DEMO);
    let out = chemo_sim(&["check-params", "--config"], &[&ok]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["accepted"], true);
    assert_eq!(report["alpha_bound"], 6.0 / 7.0);

    let gamma_one = write(&dir, "g1.toml", &DEMO.replace("gamma = \"3/2\"", "gamma = 1"));
    let out = chemo_sim(&["check-params", "--config"], &[&gamma_one]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["violations"].as_array().unwrap().iter().any(|v| v == "γ>1"));

    let bad = write(&dir, "bad.toml", &DEMO.replace("mu1 * s^alpha", "mu1 * s^^alpha"));
    let out = chemo_sim(&["check-params", "--config"], &[&bad]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 11"), "{err}");

    let missing = dir.path().join("missing.toml");
    assert_eq!(chemo_sim(&["check-params", "--config"], &[&missing]).status.code(), Some(3));
    assert_eq!(chemo_sim(&["no-such-command"], &[]).status.code(), Some(3));
}

#[test]
fn coefficient_violation_is_inadmissible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "mu.toml", &DEMO.replace("mu = \"mu1 * s^alpha\"", "mu = \"0.5 * s^alpha\""));
    let out = chemo_sim(&["check-params", "--config"], &[&cfg]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["offending_nodes"].as_array().is_some_and(|n| !n.is_empty()));
}

#[test]
fn zero_datum_writes_zero_norms() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "zero.toml", &DEMO.replace("profile = \"bump\"", "profile = \"constant\"").replace("amplitude = 2.0", "amplitude = 0.0"));
    let out = dir.path().join("run");
    let status = simulate(&cfg, &out);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let record: RunRecord = serde_json::from_slice(&status.stdout).unwrap();
    assert_eq!(record.outcome, Outcome::Completed);
    let samples = read_trajectory(&out.join("trajectory.csv")).unwrap();
    assert_eq!(samples.len(), 21);
    assert!(samples.iter().all(|s| s.mass == 0.0 && s.lq_norm == 0.0 && s.linf_norm == 0.0 && s.min_u == 0.0));
    let header = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,mass,lq_norm,linf_norm,dt,min_u\n"));
}

#[test]
fn simulate_writes_summary_and_refuses_inadmissible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "demo.toml", DEMO);
    let out = dir.path().join("demo");
    assert!(simulate(&cfg, &out).status.success());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["config_hash", "terminated_at", "blowup_reason", "max_mass", "max_linf", "K"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["terminated_at"], 2.0);
    assert_eq!(summary["blowup_reason"], serde_json::Value::Null);

    let inadmissible = write(&dir, "p.toml", &DEMO.replace("p = 4", "p = 2"));
    let out = dir.path().join("p");
    let refused = simulate(&inadmissible, &out);
    assert_eq!(refused.status.code(), Some(2));
    assert!(!out.join("trajectory.csv").exists());
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chemo-sim"));
    let forced = cmd
        .args(["simulate", "--force-inadmissible", "--config"])
        .arg(&inadmissible)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(forced.status.success());
    assert!(out.join("trajectory.csv").exists());
}

#[test]
fn repeated_simulate_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "noisy.toml", &DEMO.replace("amplitude = 2.0", "amplitude = 2.0\nnoise = 0.3"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(simulate(&cfg, &a).status.success());
    assert!(simulate(&cfg, &b).status.success());
    assert_eq!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(b.join("trajectory.csv")).unwrap());

    let c = dir.path().join("c");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chemo-sim"));
    let out = cmd.args(["simulate", "--seed", "99", "--config"]).arg(&cfg).arg("--out").arg(&c).output().unwrap();
    assert!(out.status.success());
    assert_ne!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(c.join("trajectory.csv")).unwrap());
}

fn sweep_text(axes: &str) -> String {
    let base = DEMO
        .replace("[exponents]", "[base.exponents]")
        .replace("[coefficients]", "[base.coefficients]")
        .replace("[grid]", "[base.grid]")
        .replace("[initial]", "[base.initial]")
        .replace("[time]", "[base.time]")
        .replace("t_end = 2.0", "t_end = 0.5");
    format!("[axes]\n{axes}\n{base}")
}

fn sweep(config: &Path, out: &Path, extra: &[&str]) -> Vec<RunRecord> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chemo-sim"));
    let status = cmd.arg("sweep").args(extra).arg("--config").arg(config).arg("--out").arg(out).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    serde_json::from_slice(&fs::read(out.join("registry.json")).unwrap()).unwrap()
}

#[test]
fn alpha_sweep_skips_points_past_the_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sweep.toml", &sweep_text("alpha = [\"1/4\", \"1/2\", \"6/7\", 1]"));
    let records = sweep(&cfg, &dir.path().join("plain"), &[]);
    let outcomes: Vec<Outcome> = records.iter().map(|r| r.outcome).collect();
    assert_eq!(
        outcomes,
        [Outcome::Completed, Outcome::Completed, Outcome::InadmissibleSkipped, Outcome::InadmissibleSkipped]
    );
    let text = fs::read_to_string(dir.path().join("plain/registry.json")).unwrap();
    assert!(text.contains("\"inadmissible (skipped)\""));

    let forced = sweep(&cfg, &dir.path().join("forced"), &["--force-inadmissible"]);
    assert!(forced.iter().all(|r| matches!(r.outcome, Outcome::Completed | Outcome::Blowup)));
}

#[test]
fn sweep_is_idempotent_and_order_independent_of_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sweep.toml", &sweep_text("alpha = [\"1/4\", \"1/2\", \"6/7\"]\namplitude = [1.0, 3.0]\nmu1 = [0.5, 1.0]"));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let records = sweep(&cfg, &a, &["--jobs", "1"]);
    sweep(&cfg, &b, &["--jobs", "3"]);
    assert_eq!(records.len(), 12);
    assert_eq!(fs::read(a.join("registry.json")).unwrap(), fs::read(b.join("registry.json")).unwrap());
    sweep(&cfg, &a, &["--jobs", "2"]);
    assert_eq!(fs::read(a.join("registry.json")).unwrap(), fs::read(b.join("registry.json")).unwrap());
    for r in records.iter().filter(|r| r.outcome == Outcome::Completed) {
        let csv = r.trajectory_csv.as_ref().unwrap();
        assert_eq!(fs::read(a.join(csv)).unwrap(), fs::read(b.join(csv)).unwrap());
    }
}

#[test]
fn one_point_sweep_matches_simulate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sweep.toml", &sweep_text(""));
    let records = sweep(&cfg, &dir.path().join("sweep"), &[]);
    assert_eq!(records.len(), 1);

    let single = write(&dir, "single.toml", &DEMO.replace("t_end = 2.0", "t_end = 0.5"));
    let out = dir.path().join("single");
    let status = simulate(&single, &out);
    let record: RunRecord = serde_json::from_slice(&status.stdout).unwrap();
    assert_eq!(records[0].config_hash, record.config_hash);
    assert_eq!(records[0].max_mass, record.max_mass);
    let csv = records[0].trajectory_csv.as_ref().unwrap();
    assert_eq!(fs::read(dir.path().join("sweep").join(csv)).unwrap(), fs::read(out.join("trajectory.csv")).unwrap());
}

#[test]
fn duplicate_tuples_run_once() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sweep.toml", &sweep_text("alpha = [\"1/2\", 0.5, \"2/4\"]"));
    let records = sweep(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(records.len(), 1);
}

#[test]
fn oversized_sweep_rejected() {
    let dir = TempDir::new().unwrap();
    let values: Vec<String> = (1..=101).map(|k| format!("{}", 1.0 + k as f64 / 1000.0)).collect();
    let axes = format!("mu1 = [{v}]\namplitude = [{v}]", v = values.join(", "));
    let cfg = write(&dir, "big.toml", &sweep_text(&axes));
    let out = chemo_sim(&["sweep", "--out", "/nonexistent-dir", "--config"], &[&cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_lemmas_exit_codes() {
    let ok = chemo_sim(&["verify-lemmas"], &[]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let table = String::from_utf8_lossy(&ok.stdout);
    assert!(table.lines().next().unwrap().starts_with("id"));
    assert!(table.contains("ode-comparison") && table.contains("heat-divergence/square"));

    let corrupted = chemo_sim(&["verify-lemmas", "--samples", "10", "--corrupt-damping", "0.9"], &[]);
    assert_eq!(corrupted.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&corrupted.stdout).contains("defective"));
}
