use std::fs;
use std::process::{Command, Output};

fn pauli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pauli"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

const SMALL_RUN: &str = r#"
[run]
points = [32]
extent = [8.0]
dt = 0.01
t_end = 0.1
report_stride = 2
initial = { kind = "gaussian", center = [0.0], momentum = [1.0], width = [0.7] }
"#;

#[test]
fn validate_echoes_defaults() {
    let out = pauli(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("experiment = \"single_run\""), "{text}");
    assert!(text.contains("[run]"));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[run]\npoints = [100]\nextent = [5.0]\n").unwrap();
    let out = pauli(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));
    let missing = pauli(&["run", "--config", "/nonexistent.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn budget_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    fs::write(
        &cfg,
        "[run]\npoints = [1024, 1024, 1024]\nextent = [8.0, 8.0, 8.0]\n",
    )
    .unwrap();
    let out = pauli(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_writes_outputs_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL_RUN).unwrap();
    let out_dir = dir.path().join("out");
    let out = pauli(&[
        "--threads",
        "1",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "5",
        "--snap-stride",
        "5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["threads"], 1);
    assert!(out_dir.join("snapshots/density_000010.bin").exists());
    let echo = fs::read_to_string(out_dir.join("config.toml")).unwrap();
    assert!(echo.contains("snap_stride = 5"));

    // Same spec, seed and threads: identical CSV bytes.
    let again = dir.path().join("again");
    let args = [
        "--threads",
        "1",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
        "--seed",
        "5",
    ];
    pauli(&args);
    let snapless = dir.path().join("snapless");
    let mut args2 = args;
    args2[6] = snapless.to_str().unwrap();
    pauli(&args2);
    assert_eq!(
        fs::read(again.join("reports.csv")).unwrap(),
        fs::read(snapless.join("reports.csv")).unwrap()
    );
}

#[test]
fn study_verb_rejects_mismatched_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("experiment = \"single_run\"\n{SMALL_RUN}")).unwrap();
    let out = pauli(&[
        "study-meanfield",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn meanfield_study_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mf.toml");
    fs::write(&cfg, "[meanfield]\npoints = 16\nextent = 8.0\nn_list = [2, 3]\nsample_times = [0.0, 0.05]\ndt = 0.005\n").unwrap();
    let out_dir = dir.path().join("mf");
    let out = pauli(&[
        "study-meanfield",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let monotone = manifest["verdict"]["monotone"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if monotone { 0 } else { 3 }));
    let csv = fs::read_to_string(out_dir.join("meanfield.csv")).unwrap();
    assert!(csv.starts_with("config_hash,N,t,trace_distance,coupling,grid\n"));
}

#[test]
fn info_is_json() {
    let out = pauli(&["info"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["basket"]["functions"].as_array().unwrap().len(), 12);
    assert_eq!(v["exit_codes"]["budget"], 4);
}
