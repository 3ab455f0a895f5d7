//! Experiment execution: CSV tables, field snapshots and the run manifest.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Experiment, ExperimentSpec, InitialSpec, RunSpec, SpinSpec};
use super::semiclassical::{run_semiclassical_study, SemiclassicalResult};
use crate::error::{Error, Result};
use crate::field::{SpinorField, C64};
use crate::grid::UniformGrid;
use crate::initial::{
    coherent_mixture, gaussian_packet, thermal_mixed_state, CoherentNodes, SPIN_DOWN, SPIN_UP,
};
use crate::nbody::{meanfield_study, monotone_in_n, MeanFieldRow};
use crate::solver::{propagate_with, StepReport};
use crate::state::{density, MixedState};
use crate::wigner::Basket;

pub const REPORT_COLUMNS: [&str; 11] = [
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
    "norm_drift",
];
pub const SEMICLASSICAL_COLUMNS: [&str; 7] = [
    "config_hash",
    "hbar",
    "t",
    "distance",
    "density_l2",
    "current_l2",
    "orbitals",
];
pub const PAIRING_COLUMNS: [&str; 5] = ["config_hash", "hbar", "t", "function", "value"];
pub const MEANFIELD_COLUMNS: [&str; 6] = [
    "config_hash",
    "N",
    "t",
    "trace_distance",
    "coupling",
    "grid",
];

/// Slack for the monotonicity verdicts of the studies.
pub const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

/// Largest deviations seen by the run monitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorSummary {
    pub mass_error: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub mass_tol: f64,
    pub energy_tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub monotone: bool,
    /// `(t, slope)` of `log D` against `log hbar`; empty for the mean-field study.
    pub slopes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub experiment: Experiment,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub threads: usize,
    pub status: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitors: Option<MonitorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub files: Vec<FileEntry>,
}

/// Initial mixed state of a single run.
pub fn build_initial(run: &RunSpec, grid: &UniformGrid, seed: u64) -> Result<MixedState> {
    let d = grid.dim();
    let hbar = run.hbar;
    let with_spin =
        |make: &dyn Fn([C64; 2]) -> Result<SpinorField>, spin: SpinSpec| -> Result<MixedState> {
            match spin {
                SpinSpec::Up => MixedState::pure(make(SPIN_UP)?, hbar),
                SpinSpec::Down => MixedState::pure(make(SPIN_DOWN)?, hbar),
                SpinSpec::X => {
                    let r = std::f64::consts::FRAC_1_SQRT_2;
                    MixedState::pure(make([C64::new(r, 0.0), C64::new(r, 0.0)])?, hbar)
                }
                SpinSpec::Unpolarized => {
                    MixedState::new(vec![make(SPIN_UP)?, make(SPIN_DOWN)?], vec![0.5, 0.5], hbar)
                }
            }
        };
    match &run.initial {
        InitialSpec::Gaussian {
            center,
            momentum,
            width,
            spin,
        } => {
            let pad = |v: &[f64], fill: f64| {
                let mut a = [fill; 3];
                a[..d].copy_from_slice(&v[..d]);
                a
            };
            let (c, p, w) = (pad(center, 0.0), pad(momentum, 0.0), pad(width, 1.0));
            with_spin(&|chi| gaussian_packet(grid, c, p, w, hbar, chi), *spin)
        }
        InitialSpec::Uniform { spin } => {
            let amp = C64::new(1.0 / (grid.len() as f64 * grid.cell_volume()).sqrt(), 0.0);
            with_spin(
                &|chi| SpinorField::from_scalar(*grid, &vec![amp; grid.len()], chi),
                *spin,
            )
        }
        InitialSpec::Thermal {
            datum,
            cutoff,
            max_orbitals,
        } => thermal_mixed_state(grid, datum, hbar, SPIN_UP, *cutoff, *max_orbitals),
        InitialSpec::CoherentNodes {
            datum,
            oversample,
            max_nodes,
        } => {
            let nodes = CoherentNodes {
                oversample: *oversample,
                max_nodes: *max_nodes,
                seed,
            };
            coherent_mixture(grid, datum, hbar, SPIN_UP, &nodes)
        }
    }
}

/// Writes a row of display-formatted values; `{}` on `f64` round-trips.
fn write_row(w: &mut csv::Writer<File>, fields: &[String]) -> Result<()> {
    w.write_record(fields)?;
    Ok(())
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let bytes = fs::read(path)?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

/// Output directory bookkeeping.
struct Outputs {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, rel: &str) -> PathBuf {
        let p = self.root.join(rel);
        self.files.push(p.clone());
        p
    }

    fn entries(&self) -> Result<Vec<FileEntry>> {
        let mut out = Vec::new();
        for p in &self.files {
            if !p.exists() {
                continue;
            }
            let (bytes, sha256) = sha256_file(p)?;
            let rel = p.strip_prefix(&self.root).unwrap_or(p);
            out.push(FileEntry {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes,
                sha256,
            });
        }
        Ok(out)
    }
}

#[derive(Default)]
struct Findings {
    monitors: Option<MonitorSummary>,
    verdict: Option<Verdict>,
}

fn report_row(hash: &str, r: &StepReport) -> Vec<String> {
    vec![
        hash.to_string(),
        r.step.to_string(),
        r.time.to_string(),
        r.mass.to_string(),
        r.total_energy().to_string(),
        r.energy.kinetic.to_string(),
        r.energy.stern_gerlach.to_string(),
        r.energy.external.to_string(),
        r.energy.self_energy.to_string(),
        r.iterations.to_string(),
        r.norm_drift.to_string(),
    ]
}

fn run_single(spec: &ExperimentSpec, out: &mut Outputs, found: &mut Findings) -> Result<()> {
    let run = spec.run();
    let hash = spec.hash();
    let grid = run.grid()?;
    let gauge = run.gauge.build(&grid)?;
    let state = build_initial(run, &grid, spec.seed)?;
    let mut cfg = run.solver_config();
    // Snapshots are streamed to disk by the observer instead.
    cfg.snapshot_stride = 0;
    let snap = run.snap_stride;
    if snap > 0 {
        fs::create_dir_all(out.root.join("snapshots"))?;
    }
    let mut csv = csv_writer(&out.path("reports.csv"), &REPORT_COLUMNS)?;
    let mut summary = MonitorSummary {
        mass_error: 0.0,
        norm_drift: 0.0,
        energy_drift: 0.0,
        mass_tol: run.monitors.mass_tol,
        energy_tol: run.monitors.energy_tol,
        passed: true,
    };
    let mut e0 = None;
    let mut snap_paths = Vec::new();
    let result = propagate_with(&state, &gauge, &cfg, |solver, st, report| {
        if let Some(r) = report {
            write_row(&mut csv, &report_row(&hash, r))?;
            let e = r.total_energy();
            let e0 = *e0.get_or_insert(e);
            summary.mass_error = summary.mass_error.max((r.mass - 1.0).abs());
            summary.norm_drift = summary.norm_drift.max(r.norm_drift);
            summary.energy_drift = summary.energy_drift.max((e - e0).abs() / e0.abs().max(1.0));
        }
        let n = solver.steps_taken();
        if snap > 0 && n % snap == 0 {
            let stem = out.root.join(format!("snapshots/density_{n:06}"));
            crate::io::write_scalar(&stem, &density(st), Some(run.hbar))?;
            snap_paths.push(stem);
        }
        Ok(())
    });
    csv.flush()?;
    for stem in snap_paths {
        out.files.push(stem.with_extension("bin"));
        out.files.push(stem.with_extension("json"));
    }
    let traj = result?;
    let final_rho = density(&traj.final_state);
    let p = out.path("final_density.bin");
    out.path("final_density.json");
    crate::io::write_scalar(&p.with_extension(""), &final_rho, Some(run.hbar))?;
    if run.poisswell.is_some() {
        // Self-generated vector potential after a last magnetostatic solve.
        let solver = crate::solver::PauliSolver::new(&traj.final_state, &gauge, &cfg)?;
        let p = out.path("a_self.bin");
        out.path("a_self.json");
        crate::io::write_vector(
            &p.with_extension(""),
            solver.self_generated_potential(),
            Some(run.hbar),
        )?;
    }
    summary.passed = summary.mass_error.max(summary.norm_drift) <= summary.mass_tol
        && summary.energy_drift <= summary.energy_tol;
    found.monitors = Some(summary);
    if !summary.passed {
        return Err(Error::Monitor(format!(
            "mass error {:.3e}, norm drift {:.3e} (tol {:.1e}); energy drift {:.3e} (tol {:.1e})",
            summary.mass_error,
            summary.norm_drift,
            summary.mass_tol,
            summary.energy_drift,
            summary.energy_tol
        )));
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes `semiclassical.csv` and `pairings.csv`.
pub fn write_semiclassical(
    dir: &Path,
    hash: &str,
    res: &SemiclassicalResult,
) -> Result<(PathBuf, PathBuf)> {
    let main = dir.join("semiclassical.csv");
    let mut w = csv_writer(&main, &SEMICLASSICAL_COLUMNS)?;
    for r in &res.rows {
        let row = [
            hash.to_string(),
            r.hbar.to_string(),
            r.t.to_string(),
            r.distance.to_string(),
        ]
        .into_iter()
        .chain([
            r.density_l2.to_string(),
            r.current_l2.to_string(),
            r.orbitals.to_string(),
        ])
        .collect::<Vec<_>>();
        write_row(&mut w, &row)?;
    }
    w.flush()?;
    let pairs = dir.join("pairings.csv");
    let mut w = csv_writer(&pairs, &PAIRING_COLUMNS)?;
    for p in &res.pairings {
        write_row(
            &mut w,
            &[
                hash.to_string(),
                opt(p.hbar),
                p.t.to_string(),
                p.function.clone(),
                p.value.to_string(),
            ],
        )?;
    }
    w.flush()?;
    Ok((main, pairs))
}

pub fn write_meanfield(path: &Path, hash: &str, rows: &[MeanFieldRow]) -> Result<()> {
    let mut w = csv_writer(path, &MEANFIELD_COLUMNS)?;
    for r in rows {
        write_row(
            &mut w,
            &[
                hash.to_string(),
                r.n.to_string(),
                r.t.to_string(),
                r.trace_distance.to_string(),
                r.coupling.to_string(),
                r.grid.to_string(),
            ],
        )?;
    }
    w.flush()?;
    Ok(())
}

fn run_semiclassical(spec: &ExperimentSpec, out: &mut Outputs, found: &mut Findings) -> Result<()> {
    let res = run_semiclassical_study(spec.semiclassical(), &Basket::v1(), spec.seed)?;
    out.path("semiclassical.csv");
    out.path("pairings.csv");
    write_semiclassical(&out.root, &spec.hash(), &res)?;
    let monotone = res.monotone(MONOTONE_TOL);
    found.verdict = Some(Verdict {
        monotone,
        slopes: res.slopes.clone(),
    });
    if !monotone {
        return Err(Error::Monitor("distance is not monotone in hbar".into()));
    }
    Ok(())
}

fn run_meanfield(spec: &ExperimentSpec, out: &mut Outputs, found: &mut Findings) -> Result<()> {
    let mf = spec.meanfield();
    let grid = mf.grid()?;
    let psi = gaussian_packet(
        &grid,
        [mf.center, 0.0, 0.0],
        [mf.momentum, 0.0, 0.0],
        [mf.width, 1.0, 1.0],
        mf.hbar,
        SPIN_UP,
    )?;
    let orbital = psi.component(0).to_vec();
    let trap = mf.trap(&grid);
    let rows = meanfield_study(grid, &orbital, trap.as_deref(), &mf.config())?;
    write_meanfield(&out.path("meanfield.csv"), &spec.hash(), &rows)?;
    let monotone = monotone_in_n(&rows, MONOTONE_TOL);
    found.verdict = Some(Verdict {
        monotone,
        slopes: Vec::new(),
    });
    if !monotone {
        return Err(Error::Monitor("trace distance is not monotone in N".into()));
    }
    Ok(())
}

/// Runs a validated, normalized spec into `dir`.
///
/// Failures of the experiment itself are recorded in the manifest; the
/// returned error is reserved for failures to write the outputs.
pub fn execute(spec: &ExperimentSpec, dir: &Path) -> Result<Manifest> {
    let mut out = Outputs::new(dir)?;
    fs::write(out.path("config.toml"), spec.to_toml())?;
    let mut found = Findings::default();
    log::info!("running {:?} into {}", spec.experiment, dir.display());
    let result = match spec.experiment {
        Experiment::SingleRun | Experiment::PoisswellRun => run_single(spec, &mut out, &mut found),
        Experiment::SemiclassicalStudy => run_semiclassical(spec, &mut out, &mut found),
        Experiment::MeanfieldStudy => run_meanfield(spec, &mut out, &mut found),
    };
    let (status, exit_code, failure) = match &result {
        Ok(()) => ("ok", 0, None),
        Err(e) => {
            log::error!("{e}");
            let status = if matches!(e, Error::Monitor(_)) {
                "monitor_failed"
            } else {
                "failed"
            };
            (
                status,
                e.exit_code(),
                Some(Failure {
                    kind: e.kind().into(),
                    message: e.to_string(),
                }),
            )
        }
    };
    if let Some(f) = &failure {
        fs::write(out.path("failure.json"), serde_json::to_string_pretty(f)?)?;
    }
    let manifest = Manifest {
        schema: spec.schema,
        experiment: spec.experiment,
        config_hash: spec.hash(),
        seed: spec.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        threads: rayon::current_num_threads(),
        status: status.into(),
        exit_code,
        failure,
        monitors: found.monitors,
        verdict: found.verdict,
        files: out.entries()?,
    };
    let mut f = File::create(dir.join("manifest.json"))?;
    f.write_all(serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest)
}
