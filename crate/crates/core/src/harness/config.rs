//! Versioned TOML experiment specification.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::semiclassical::{GaugeSpec, InitialData, SemiclassicalConfig, VlasovSpec};
use crate::error::{Error, Result};
use crate::fields::{InteractionKernel, PoissonConfig, PoisswellConfig};
use crate::grid::{UniformGrid, DEFAULT_POINT_BUDGET};
use crate::initial::{CoherentNodes, GaussianDatum};
use crate::nbody::{MeanFieldConfig, NBODY_AMPLITUDE_BUDGET};
use crate::solver::{Nonlinearity, Scheme, SolverConfig};
use crate::vlasov::VLASOV_POINT_BUDGET;

pub const SCHEMA_VERSION: u32 = 1;
/// Estimated working-set ceiling for one run.
pub const MEMORY_BUDGET_BYTES: u128 = 3 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    SingleRun,
    SemiclassicalStudy,
    MeanfieldStudy,
    PoisswellRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpinSpec {
    #[default]
    Up,
    Down,
    /// `(|up> + |down>) / sqrt 2`.
    X,
    /// Equal-weight mixture of up and down with the same spatial orbital.
    Unpolarized,
}

/// Initial state of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Gaussian {
        center: Vec<f64>,
        momentum: Vec<f64>,
        width: Vec<f64>,
        #[serde(default)]
        spin: SpinSpec,
    },
    /// Constant orbital.
    Uniform {
        #[serde(default)]
        spin: SpinSpec,
    },
    Thermal {
        datum: GaussianDatum,
        cutoff: f64,
        max_orbitals: usize,
    },
    CoherentNodes {
        datum: GaussianDatum,
        oversample: usize,
        max_nodes: usize,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::Gaussian {
            center: vec![0.0, 0.0],
            momentum: vec![1.0, 0.5],
            width: vec![1.0, 1.0],
            spin: SpinSpec::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Monitors {
    /// Largest allowed `|mass - 1|` and orbital norm error.
    pub mass_tol: f64,
    /// Largest allowed `|E(t) - E(0)| / max(|E(0)|, 1)`.
    pub energy_tol: f64,
}

impl Default for Monitors {
    fn default() -> Self {
        Self {
            mass_tol: 1e-10,
            energy_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub points: Vec<usize>,
    pub extent: Vec<f64>,
    pub hbar: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub report_stride: usize,
    /// Density snapshots every this many steps; 0 disables them.
    pub snap_stride: usize,
    pub spin_current_sign: f64,
    pub gauge: GaugeSpec,
    pub nonlinearity: Nonlinearity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisswell: Option<PoisswellConfig>,
    pub initial: InitialSpec,
    pub monitors: Monitors,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            points: vec![128, 128],
            extent: vec![16.0, 16.0],
            hbar: 1.0,
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::StrangSplit,
            report_stride: 10,
            snap_stride: 0,
            spin_current_sign: 1.0,
            gauge: GaugeSpec::default(),
            nonlinearity: Nonlinearity::Poisson(PoissonConfig::periodic(1.0)),
            poisswell: None,
            initial: InitialSpec::default(),
            monitors: Monitors::default(),
        }
    }
}

impl RunSpec {
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.points.len(), &self.points, &self.extent)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            scheme: self.scheme,
            nonlinearity: self.nonlinearity.clone(),
            poisswell: self.poisswell,
            snapshot_stride: self.snap_stride,
            report_stride: self.report_stride.max(1),
            spin_current_sign: self.spin_current_sign,
            ..SolverConfig::default()
        }
    }

    /// Upper bound on the number of orbitals the initial state will hold.
    pub fn orbital_bound(&self) -> usize {
        match &self.initial {
            InitialSpec::Gaussian { spin, .. } | InitialSpec::Uniform { spin } => {
                if *spin == SpinSpec::Unpolarized {
                    2
                } else {
                    1
                }
            }
            InitialSpec::Thermal { max_orbitals, .. } => *max_orbitals,
            InitialSpec::CoherentNodes { max_nodes, .. } => *max_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeanFieldSpec {
    pub points: usize,
    pub extent: f64,
    pub hbar: f64,
    pub n_list: Vec<usize>,
    pub sample_times: Vec<f64>,
    pub dt: f64,
    /// Strength of the softened kernel `-coupling / sqrt(x^2 + softening^2)`;
    /// zero switches the interaction off.
    pub coupling: f64,
    pub softening: f64,
    /// Harmonic trap frequency; zero for none.
    pub trap_omega: f64,
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl Default for MeanFieldSpec {
    fn default() -> Self {
        Self {
            points: 32,
            extent: 10.0,
            hbar: 1.0,
            n_list: vec![2, 3, 4],
            sample_times: vec![0.0, 0.25, 0.5, 1.0],
            dt: 0.005,
            coupling: 0.1,
            softening: 0.5,
            trap_omega: 1.0,
            center: 0.5,
            momentum: 0.0,
            width: 0.7,
        }
    }
}

impl MeanFieldSpec {
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::cubic(1, self.points, self.extent)
    }

    pub fn config(&self) -> MeanFieldConfig {
        MeanFieldConfig {
            hbar: self.hbar,
            n_list: self.n_list.clone(),
            sample_times: self.sample_times.clone(),
            dt: self.dt,
            kernel: (self.coupling != 0.0)
                .then(|| InteractionKernel::softened(self.coupling, self.softening)),
        }
    }

    pub fn trap(&self, grid: &UniformGrid) -> Option<Vec<f64>> {
        (self.trap_omega != 0.0).then(|| {
            (0..grid.points(0))
                .map(|i| 0.5 * (self.trap_omega * grid.coord(0, i)).powi(2))
                .collect()
        })
    }
}

impl Default for SemiclassicalConfig {
    /// Self-consistent 1d1v case.
    fn default() -> Self {
        Self {
            points: vec![256],
            extent: vec![16.0],
            hbar_ladder: vec![0.4, 0.2, 0.1],
            datum: GaussianDatum {
                center: [0.0; 3],
                momentum: [0.3, 0.0, 0.0],
                sigma_x: [0.6, 1.0, 1.0],
                sigma_p: [0.6, 1.0, 1.0],
            },
            gauge: GaugeSpec::default(),
            poisson: Some(PoissonConfig::periodic(1.0)),
            dt: 0.01,
            sample_times: vec![0.0, 0.5, 1.0],
            vlasov: VlasovSpec {
                x_points: vec![256],
                p_points: vec![256],
                p_extent: vec![8.0],
                dt: 0.01,
            },
            initial: InitialData::Continuum {
                cutoff: 1e-10,
                max_orbitals: 2000,
            },
            spin_current_sign: 1.0,
        }
    }
}

/// A complete experiment. Only the section matching `experiment` is kept
/// after normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub schema: u32,
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semiclassical: Option<SemiclassicalConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldSpec>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment: Experiment::SingleRun,
            seed: 0,
            run: None,
            semiclassical: None,
            meanfield: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::Validation(vec![format!("parse error: {}", e.message())]))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs serialize")
    }

    /// SHA-256 of the normalized TOML text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn run(&self) -> &RunSpec {
        self.run
            .as_ref()
            .expect("normalized spec has a run section")
    }

    pub fn semiclassical(&self) -> &SemiclassicalConfig {
        self.semiclassical
            .as_ref()
            .expect("normalized spec has a semiclassical section")
    }

    pub fn meanfield(&self) -> &MeanFieldSpec {
        self.meanfield
            .as_ref()
            .expect("normalized spec has a meanfield section")
    }

    /// Materializes defaults for the active section and drops the others.
    pub fn normalized(mut self) -> Self {
        let (run, sc, mf) = (
            self.run.take(),
            self.semiclassical.take(),
            self.meanfield.take(),
        );
        match self.experiment {
            Experiment::SingleRun => self.run = Some(run.unwrap_or_default()),
            Experiment::PoisswellRun => {
                let mut r = run.unwrap_or_else(|| RunSpec {
                    nonlinearity: Nonlinearity::None,
                    ..RunSpec::default()
                });
                r.poisswell.get_or_insert_with(PoisswellConfig::default);
                self.run = Some(r);
            }
            Experiment::SemiclassicalStudy => self.semiclassical = Some(sc.unwrap_or_default()),
            Experiment::MeanfieldStudy => self.meanfield = Some(mf.unwrap_or_default()),
        }
        self
    }
}

/// Accumulates problems; budget problems are kept apart for the exit code.
#[derive(Debug, Default)]
struct Problems {
    items: Vec<String>,
    budget: Option<Error>,
}

impl Problems {
    fn push(&mut self, msg: impl Into<String>) {
        self.items.push(msg.into());
    }

    fn check<T>(&mut self, ctx: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e @ Error::Budget { .. }) => {
                self.items.push(format!("{ctx}: {e}"));
                self.budget.get_or_insert(e);
                None
            }
            Err(e) => {
                self.items.push(format!("{ctx}: {e}"));
                None
            }
        }
    }

    fn budget(&mut self, ctx: &str, requested: u128, budget: u128) {
        if requested > budget {
            self.check::<()>(ctx, Err(Error::Budget { requested, budget }));
        }
    }

    fn finish(self) -> Result<()> {
        if self.items.is_empty() {
            return Ok(());
        }
        for p in &self.items {
            log::error!("{p}");
        }
        match self.budget {
            Some(e) => Err(e),
            None => Err(Error::Validation(self.items)),
        }
    }
}

fn check_vec_len<T>(p: &mut Problems, name: &str, v: &[T], n: usize) {
    if v.len() != n {
        p.push(format!("{name} has {} entries, expected {n}", v.len()));
    }
}

fn validate_run(r: &RunSpec, poisswell: bool, p: &mut Problems) {
    let d = r.points.len();
    if !(1..=3).contains(&d) {
        p.push(format!("run.points must have 1 to 3 entries, got {d}"));
        return;
    }
    check_vec_len(p, "run.extent", &r.extent, d);
    let total: u128 = r.points.iter().map(|&n| n as u128).product();
    p.budget("run grid", total, DEFAULT_POINT_BUDGET as u128);
    let Some(grid) = p.check("run grid", r.grid()) else {
        return;
    };
    let bytes = total * r.orbital_bound() as u128 * 2 * 16 * 4;
    p.budget("run working set (bytes)", bytes, MEMORY_BUDGET_BYTES);
    p.check("run solver", r.solver_config().validate());
    if !(r.hbar > 0.0 && r.hbar <= 1.0) {
        p.push(format!("run.hbar = {} outside (0, 1]", r.hbar));
    }
    if let Some(g) = p.check("run.gauge", r.gauge.preset()) {
        p.check("run.gauge", crate::fields::gauge_preset(&grid, &g));
    }
    match &r.nonlinearity {
        Nonlinearity::Poisson(c) | Nonlinearity::PoissonPlusXalpha { poisson: c, .. } => {
            p.check("run.nonlinearity", c.validate(&grid));
        }
        Nonlinearity::Hartree { kernel } => {
            p.check("run.nonlinearity", kernel.validate(&grid));
        }
        Nonlinearity::None => {}
    }
    if poisswell && d < 2 {
        p.push("poisswell_run needs at least two dimensions");
    }
    if !poisswell && r.poisswell.is_some() {
        p.push("run.poisswell is only allowed for poisswell_run");
    }
    match &r.initial {
        InitialSpec::Gaussian {
            center,
            momentum,
            width,
            ..
        } => {
            check_vec_len(p, "run.initial.center", center, d);
            check_vec_len(p, "run.initial.momentum", momentum, d);
            check_vec_len(p, "run.initial.width", width, d);
            if width.iter().any(|w| !(*w > 0.0)) {
                p.push("run.initial.width entries must be positive");
            }
        }
        InitialSpec::Uniform { .. } => {}
        InitialSpec::Thermal { max_orbitals, .. } => {
            if *max_orbitals == 0 {
                p.push("run.initial.max_orbitals must be positive");
            }
        }
        InitialSpec::CoherentNodes {
            oversample,
            max_nodes,
            ..
        } => {
            let nodes = CoherentNodes {
                oversample: *oversample,
                max_nodes: *max_nodes,
                seed: 0,
            };
            p.check("run.initial", nodes.count(d, r.hbar));
        }
    }
    if !(r.monitors.mass_tol > 0.0 && r.monitors.energy_tol > 0.0) {
        p.push("monitor tolerances must be positive");
    }
}

fn validate_semiclassical(c: &SemiclassicalConfig, p: &mut Problems) {
    let d = c.points.len();
    let vx: u128 = c.vlasov.x_points.iter().map(|&n| n as u128).product();
    let vp: u128 = c.vlasov.p_points.iter().map(|&n| n as u128).product();
    p.budget(
        "vlasov phase-space grid",
        vx * vp,
        VLASOV_POINT_BUDGET as u128,
    );
    let total: u128 = c.points.iter().map(|&n| n as u128).product();
    p.budget("quantum grid", total, DEFAULT_POINT_BUDGET as u128);
    let orbitals = match c.initial {
        InitialData::Continuum { max_orbitals, .. } => max_orbitals,
        InitialData::Nodes { max_nodes, .. } => max_nodes,
    };
    p.budget(
        "study working set (bytes)",
        total * orbitals as u128 * 2 * 16 * 4,
        MEMORY_BUDGET_BYTES,
    );
    if p.budget.is_some() {
        return;
    }
    for msg in c.problems() {
        p.push(msg);
    }
    if c.vlasov.p_points.len() != d || c.vlasov.p_extent.len() != d {
        p.push("vlasov momentum grid must match the position dimension");
    }
    if let InitialData::Nodes {
        oversample,
        max_nodes,
    } = c.initial
    {
        for &h in &c.hbar_ladder {
            p.check(
                "semiclassical.initial",
                CoherentNodes {
                    oversample,
                    max_nodes,
                    seed: 0,
                }
                .count(d, h),
            );
        }
    }
}

fn validate_meanfield(m: &MeanFieldSpec, p: &mut Problems) {
    let max_n = m.n_list.iter().copied().max().unwrap_or(0).min(8) as u32;
    p.budget(
        "n-body amplitudes",
        (m.points as u128).pow(max_n),
        NBODY_AMPLITUDE_BUDGET as u128,
    );
    let Some(grid) = p.check("meanfield grid", m.grid()) else {
        return;
    };
    p.check("meanfield", m.config().validate());
    if let Some(k) = m.config().kernel {
        p.check("meanfield kernel", k.validate(&grid));
    }
    if !(m.width > 0.0) {
        p.push("meanfield.width must be positive");
    }
}

/// Parses, fills defaults and checks a spec; every problem is reported.
pub fn validate_config(text: &str) -> Result<ExperimentSpec> {
    load_spec(text, &Overrides::default())
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Experiment implied by the command; a config naming another one is rejected.
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub snap_stride: Option<usize>,
}

/// [`validate_config`] with overrides applied before normalization, so the
/// echoed config and its hash include them.
pub fn load_spec(text: &str, over: &Overrides) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_toml(text)?;
    if let Some(e) = over.experiment {
        let named = toml::from_str::<toml::Table>(text)
            .map(|t| t.contains_key("experiment"))
            .unwrap_or(false);
        if named && spec.experiment != e {
            return Err(Error::Validation(vec![format!(
                "config declares experiment {:?} but the command runs {:?}",
                spec.experiment, e
            )]));
        }
        spec.experiment = e;
    }
    if let Some(seed) = over.seed {
        spec.seed = seed;
    }
    let mut spec = spec.normalized();
    if let (Some(k), Some(run)) = (over.snap_stride, spec.run.as_mut()) {
        run.snap_stride = k;
    }
    validate_spec(&spec)?;
    Ok(spec)
}

pub fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    let mut p = Problems::default();
    if spec.schema != SCHEMA_VERSION {
        p.push(format!(
            "schema {} is not supported (expected {SCHEMA_VERSION})",
            spec.schema
        ));
    }
    match spec.experiment {
        Experiment::SingleRun => validate_run(spec.run(), false, &mut p),
        Experiment::PoisswellRun => validate_run(spec.run(), true, &mut p),
        Experiment::SemiclassicalStudy => validate_semiclassical(spec.semiclassical(), &mut p),
        Experiment::MeanfieldStudy => validate_meanfield(spec.meanfield(), &mut p),
    }
    p.finish()
}
