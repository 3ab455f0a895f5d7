use std::fs;
use std::path::Path;

use pauli_core::harness::{execute, validate_config, Manifest};
use pauli_core::io::{read_scalar, read_vector};

const SINGLE: &str = r#"
seed = 7
[run]
points = [64]
extent = [10.0]
hbar = 0.5
dt = 0.001
t_end = 0.05
report_stride = 5
snap_stride = 25
nonlinearity = { kind = "poisson", mode = "periodic_zero_mean", coupling = 1.0 }
initial = { kind = "gaussian", center = [0.0], momentum = [0.5], width = [0.8] }
"#;

const POISSWELL_ZERO_CURRENT: &str = r#"
experiment = "poisswell_run"
[run]
points = [16, 16]
extent = [8.0, 8.0]
hbar = 1.0
dt = 0.01
t_end = 0.1
report_stride = 2
nonlinearity = { kind = "none" }
initial = { kind = "uniform", spin = "unpolarized" }
poisswell = { tol = 1e-12, max_iter = 20 }
"#;

const MEANFIELD: &str = r#"
experiment = "meanfield_study"
[meanfield]
points = 16
extent = 8.0
n_list = [2, 3]
sample_times = [0.0, 0.05, 0.1]
dt = 0.005
"#;

fn run(text: &str, dir: &Path) -> Manifest {
    let spec = validate_config(text).unwrap();
    execute(&spec, dir).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn single_run_writes_reports_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(SINGLE, dir.path());
    assert_eq!(m.status, "ok", "{m:?}");
    assert_eq!(m.exit_code, 0);
    let mon = m.monitors.unwrap();
    assert!(mon.passed && mon.mass_error < 1e-10, "{mon:?}");

    let (header, rows) = read_csv(&dir.path().join("reports.csv"));
    assert_eq!(
        header,
        [
            "config_hash",
            "step",
            "t",
            "mass",
            "E_total",
            "E_kin",
            "E_sg",
            "E_ext",
            "E_self",
            "iterations",
            "norm_drift"
        ]
    );
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[0] == m.config_hash));
    assert_eq!(rows.last().unwrap()[1], "50");

    let (rho, hbar) = read_scalar(&dir.path().join("snapshots/density_000025")).unwrap();
    assert_eq!(hbar, Some(0.5));
    assert!((rho.integral() - 1.0).abs() < 1e-10);
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for want in [
        "config.toml",
        "reports.csv",
        "snapshots/density_000000.bin",
        "final_density.json",
    ] {
        assert!(names.contains(&want), "{names:?}");
    }

    // The echoed config reproduces the hash.
    let echo = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert_eq!(validate_config(&echo).unwrap().hash(), m.config_hash);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config_hash"], m.config_hash.as_str());
}

#[test]
fn poisson_run_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    run(SINGLE, dir.path());
    compare_golden("poisson_1d.csv", &dir.path().join("reports.csv"));
}

#[test]
fn free_run_keeps_energy() {
    let dir = tempfile::tempdir().unwrap();
    let text = SINGLE.replace(
        "kind = \"poisson\", mode = \"periodic_zero_mean\", coupling = 1.0",
        "kind = \"none\"",
    );
    let m = run(&text, dir.path());
    assert_eq!(m.exit_code, 0);
    let (_, rows) = read_csv(&dir.path().join("reports.csv"));
    let e: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(
        e.iter().all(|x| (x - e[0]).abs() < 1e-12 * e[0].abs()),
        "{e:?}"
    );
    assert!(rows.iter().all(|r| r[8] == "0"));
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run(SINGLE, a.path());
    let mb = run(SINGLE, b.path());
    assert_eq!(ma.files, mb.files);
}

#[test]
fn monitor_failure_exits_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let text = SINGLE.replace(
        "report_stride = 5",
        "report_stride = 5\nmonitors = { mass_tol = 1e-10, energy_tol = 1e-300 }",
    );
    let m = run(&text, dir.path());
    assert_eq!(m.status, "monitor_failed");
    assert_eq!(m.exit_code, 3);
    assert!(dir.path().join("failure.json").exists());
    assert!(dir.path().join("reports.csv").exists());
}

#[test]
fn numerical_failure_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let text = SINGLE.replace("dt = 0.001", "dt = 0.5\nscheme = \"rk4_pseudospectral\"");
    let m = run(&text, dir.path());
    assert_ne!(m.exit_code, 0);
    assert!(m.failure.is_some());
}

fn compare_golden(name: &str, produced: &Path) {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden.parent().unwrap()).unwrap();
        fs::copy(produced, &golden).unwrap();
        return;
    }
    let (gh, grows) = read_csv(&golden);
    let (ph, prows) = read_csv(produced);
    assert_eq!(gh, ph);
    assert_eq!(grows.len(), prows.len());
    for (g, p) in grows.iter().zip(&prows) {
        for (a, b) in g.iter().zip(p) {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-10, "{name}: {a} vs {b}"),
                _ => assert_eq!(a, b, "{name}"),
            }
        }
    }
}

#[test]
fn poisswell_zero_current_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(POISSWELL_ZERO_CURRENT, dir.path());
    assert_eq!(m.exit_code, 0, "{m:?}");
    let (a, _) = read_vector(&dir.path().join("a_self")).unwrap();
    assert!(a.max_abs() < 1e-14);
    let (_, rows) = read_csv(&dir.path().join("reports.csv"));
    for r in &rows {
        assert!(r[9].parse::<usize>().unwrap() <= 1);
    }
    compare_golden(
        "poisswell_zero_current.csv",
        &dir.path().join("reports.csv"),
    );
}

#[test]
fn meanfield_study_writes_table_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(MEANFIELD, dir.path());
    let v = m.verdict.clone().unwrap();
    assert_eq!(m.exit_code, if v.monotone { 0 } else { 3 });
    let (header, rows) = read_csv(&dir.path().join("meanfield.csv"));
    assert_eq!(
        header,
        [
            "config_hash",
            "N",
            "t",
            "trace_distance",
            "coupling",
            "grid"
        ]
    );
    assert_eq!(rows.len(), 6);
    assert!(rows[0][3].parse::<f64>().unwrap() < 1e-12);
    compare_golden("meanfield_small.csv", &dir.path().join("meanfield.csv"));
}

#[test]
fn semiclassical_study_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
experiment = "semiclassical_study"
[semiclassical]
points = [128]
extent = [12.0]
hbar_ladder = [0.4, 0.3, 0.2]
dt = 0.05
sample_times = [0.0, 0.1]
datum = { center = [0.0, 0.0, 0.0], momentum = [0.3, 0.0, 0.0], sigma_x = [0.6, 1.0, 1.0], sigma_p = [0.6, 1.0, 1.0] }
vlasov = { x_points = [64], p_points = [64], p_extent = [8.0], dt = 0.05 }
poisson = { mode = "periodic_zero_mean", coupling = 1.0 }
initial = { kind = "continuum", cutoff = 1e-5, max_orbitals = 200 }
"#;
    let m = run(text, dir.path());
    let v = m
        .verdict
        .clone()
        .unwrap_or_else(|| panic!("{:?}", m.failure));
    assert_eq!(m.exit_code, if v.monotone { 0 } else { 3 });
    assert_eq!(v.slopes.len(), 2);
    let (header, rows) = read_csv(&dir.path().join("semiclassical.csv"));
    assert_eq!(
        header,
        [
            "config_hash",
            "hbar",
            "t",
            "distance",
            "density_l2",
            "current_l2",
            "orbitals"
        ]
    );
    assert_eq!(rows.len(), 6);
    let (_, pairs) = read_csv(&dir.path().join("pairings.csv"));
    // Reference rows carry an empty hbar.
    assert!(pairs.iter().any(|r| r[1].is_empty()));
}
