//! Semiclassical study: Pauli-Poisson runs along a decreasing `hbar` ladder
//! compared with one Vlasov-Lorentz-Poisson run through weak pairings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::fields::{gauge_preset, GaugePreset, PoissonConfig};
use crate::gauge::GaugeField;
use crate::grid::UniformGrid;
use crate::initial::{
    coherent_mixture, thermal_mixed_state, CoherentNodes, GaussianDatum, SPIN_UP,
};
use crate::observables::pauli_current;
use crate::solver::{Nonlinearity, PauliSolver, Scheme, SolverConfig};
use crate::state::{density, MixedState};
use crate::vlasov::{
    vlasov_propagate_with, LorentzFields, PhaseSpaceDensity, VlasovConfig, VlasovGrid,
};
use crate::wigner::{pair_state_all, Basket};

/// Gauge preset by tag, e.g. `uniform_b_symmetric` with `b0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
}

impl Default for GaugeSpec {
    fn default() -> Self {
        Self {
            preset: "zero".into(),
            b0: None,
        }
    }
}

impl GaugeSpec {
    pub fn preset(&self) -> Result<GaugePreset> {
        GaugePreset::from_tag(&self.preset, self.b0)
    }

    pub fn build(&self, grid: &UniformGrid) -> Result<GaugeField> {
        gauge_preset(grid, &self.preset()?)
    }
}

/// How the `hbar`-dependent initial mixed state is built from the datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Coherent states distributed over the whole datum: a thermal Hermite
    /// ensemble whose Wigner transform is the datum smoothed by the
    /// coherent-state Gaussian.
    Continuum { cutoff: f64, max_orbitals: usize },
    /// Coherent states on seeded nodes matching the datum's first two moments.
    Nodes { oversample: usize, max_nodes: usize },
}

impl Default for InitialData {
    fn default() -> Self {
        Self::Continuum {
            cutoff: 1e-8,
            max_orbitals: 2000,
        }
    }
}

impl InitialData {
    pub fn build(
        &self,
        grid: &UniformGrid,
        datum: &GaussianDatum,
        hbar: f64,
        seed: u64,
    ) -> Result<MixedState> {
        match *self {
            Self::Continuum {
                cutoff,
                max_orbitals,
            } => thermal_mixed_state(grid, datum, hbar, SPIN_UP, cutoff, max_orbitals),
            Self::Nodes {
                oversample,
                max_nodes,
            } => coherent_mixture(
                grid,
                datum,
                hbar,
                SPIN_UP,
                &CoherentNodes {
                    oversample,
                    max_nodes,
                    seed,
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VlasovSpec {
    /// Position points per axis; each must divide the quantum grid's.
    pub x_points: Vec<usize>,
    pub p_points: Vec<usize>,
    pub p_extent: Vec<f64>,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemiclassicalConfig {
    pub points: Vec<usize>,
    pub extent: Vec<f64>,
    /// Strictly decreasing, at least three values.
    pub hbar_ladder: Vec<f64>,
    pub datum: GaussianDatum,
    pub gauge: GaugeSpec,
    /// Absent means no self-consistent potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson: Option<PoissonConfig>,
    pub dt: f64,
    pub sample_times: Vec<f64>,
    pub vlasov: VlasovSpec,
    pub initial: InitialData,
    pub spin_current_sign: f64,
}

fn steps_for(t: f64, dt: f64, what: &str) -> Result<usize> {
    let n = (t / dt).round();
    if !(t >= 0.0) || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::Config(format!(
            "sample time {t} is not a multiple of the {what} step {dt}"
        )));
    }
    Ok(n as usize)
}

impl SemiclassicalConfig {
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.points.len(), &self.points, &self.extent)
    }

    pub fn vlasov_grid(&self) -> Result<VlasovGrid> {
        let x = UniformGrid::new(self.points.len(), &self.vlasov.x_points, &self.extent)?;
        let p = UniformGrid::new(
            self.vlasov.p_points.len(),
            &self.vlasov.p_points,
            &self.vlasov.p_extent,
        )?;
        VlasovGrid::new(x, p)
    }

    /// Collects every problem instead of stopping at the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.grid() {
            out.push(format!("quantum grid: {e}"));
        }
        if self.vlasov.x_points.len() != self.points.len() {
            out.push("vlasov.x_points must have one entry per position axis".into());
        } else if self
            .vlasov
            .x_points
            .iter()
            .zip(&self.points)
            .any(|(v, q)| *v == 0 || q % v != 0)
        {
            out.push("vlasov.x_points must divide the quantum grid points".into());
        }
        if let Err(e) = self.vlasov_grid() {
            out.push(format!("vlasov grid: {e}"));
        }
        if self.hbar_ladder.len() < 3 {
            out.push(format!(
                "hbar ladder needs at least 3 values, got {}",
                self.hbar_ladder.len()
            ));
        }
        if self.hbar_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            out.push("hbar ladder must be strictly decreasing".into());
        }
        if self.hbar_ladder.iter().any(|&h| !(h > 0.0 && h <= 1.0)) {
            out.push("hbar values must lie in (0, 1]".into());
        }
        if self.sample_times.is_empty() {
            out.push("at least one sample time is required".into());
        }
        for &t in &self.sample_times {
            for (dt, what) in [(self.dt, "quantum"), (self.vlasov.dt, "vlasov")] {
                if let Err(e) = steps_for(t, dt, what) {
                    out.push(e.to_string());
                }
            }
        }
        if !(self.dt > 0.0) || !(self.vlasov.dt > 0.0) {
            out.push("time steps must be positive".into());
        }
        if let Err(e) = self.gauge.preset() {
            out.push(e.to_string());
        }
        if self.spin_current_sign.abs() != 1.0 {
            out.push("spin_current_sign must be +1 or -1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p.join("; ")))
        }
    }

    fn t_end(&self) -> f64 {
        self.sample_times.iter().copied().fold(0.0, f64::max)
    }
}

/// Distances between one quantum run and the reference at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiclassicalRow {
    pub hbar: f64,
    pub t: f64,
    /// `max_i |<Tr F, phi_i> - <f, phi_i>|` over the basket.
    pub distance: f64,
    /// Relative L2 distances of the position density and kinetic current.
    pub density_l2: f64,
    pub current_l2: f64,
    pub orbitals: usize,
}

/// Pairings of every basket function; `hbar` is `None` for the reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingRow {
    pub hbar: Option<f64>,
    pub t: f64,
    pub function: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiclassicalResult {
    pub rows: Vec<SemiclassicalRow>,
    pub pairings: Vec<PairingRow>,
    /// Least-squares slope of `log D` against `log hbar` per sample time.
    pub slopes: Vec<(f64, f64)>,
}

impl SemiclassicalResult {
    /// `D` non-increasing as `hbar` decreases, at every sample time.
    pub fn monotone(&self, tol: f64) -> bool {
        monotone_in_hbar(&self.rows, tol)
    }
}

/// Recomputes the verdict from emitted rows alone.
pub fn monotone_in_hbar(rows: &[SemiclassicalRow], tol: f64) -> bool {
    let mut times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.iter().all(|&t| {
        let mut at: Vec<&SemiclassicalRow> = rows.iter().filter(|r| r.t == t).collect();
        at.sort_by(|a, b| b.hbar.total_cmp(&a.hbar));
        at.windows(2).all(|w| w[1].distance <= w[0].distance + tol)
    })
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Samples a fine-grid field at the points of a grid whose point counts
/// divide it.
fn decimate(values: &[f64], fine: &UniformGrid, coarse: &UniformGrid) -> Vec<f64> {
    let fs = fine.shape();
    let cs = coarse.shape();
    let r = [fs[0] / cs[0], fs[1] / cs[1], fs[2] / cs[2]];
    (0..coarse.len())
        .map(|i| {
            let c = coarse.unravel(i);
            values[fine.index([c[0] * r[0], c[1] * r[1], c[2] * r[2]])]
        })
        .collect()
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

struct Reference {
    pairings: Vec<Vec<f64>>,
    density: Vec<Vec<f64>>,
    current: Vec<[Vec<f64>; 3]>,
}

fn vlasov_reference(cfg: &SemiclassicalConfig, basket: &Basket) -> Result<Reference> {
    let vg = cfg.vlasov_grid()?;
    let gauge = cfg.gauge.build(&vg.x())?;
    let d = vg.dim();
    let ext = vg.x().extents();
    let datum = cfg.datum;
    let f0 = PhaseSpaceDensity::from_fn(vg, |x, p| datum.eval(d, ext, x, p));
    let vcfg = VlasovConfig {
        dt: cfg.vlasov.dt,
        t_end: cfg.t_end(),
        poisson: cfg.poisson,
        ..VlasovConfig::default()
    };
    let targets: Vec<usize> = cfg
        .sample_times
        .iter()
        .map(|&t| steps_for(t, cfg.vlasov.dt, "vlasov"))
        .collect::<Result<_>>()?;
    let n = targets.len();
    let mut out = Reference {
        pairings: vec![Vec::new(); n],
        density: vec![Vec::new(); n],
        current: vec![Default::default(); n],
    };
    let mut step = 0usize;
    vlasov_propagate_with(&f0, LorentzFields::from_gauge(&gauge), &vcfg, |_, f, _| {
        for (j, &k) in targets.iter().enumerate() {
            if k == step {
                out.pairings[j] = basket
                    .functions
                    .iter()
                    .map(|phi| f.pair(phi, Some(&gauge)))
                    .collect();
                out.density[j] = f.density().values().to_vec();
                let c = f.current();
                out.current[j] = [
                    c.component(0).to_vec(),
                    c.component(1).to_vec(),
                    c.component(2).to_vec(),
                ];
            }
        }
        step += 1;
        Ok(())
    })?;
    Ok(out)
}

fn kinetic_current_coarse(
    state: &MixedState,
    gauge: &GaugeField,
    sign: f64,
    coarse: &UniformGrid,
) -> Result<[Vec<f64>; 3]> {
    let j: VectorField = pauli_current(state, gauge, sign)?;
    let fine = *state.grid();
    Ok([0, 1, 2].map(|c| decimate(j.component(c), &fine, coarse)))
}

/// Runs the reference once and the quantum solver for every `hbar`, logging
/// progress per rung.
pub fn run_semiclassical_study(
    cfg: &SemiclassicalConfig,
    basket: &Basket,
    seed: u64,
) -> Result<SemiclassicalResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let vg = cfg.vlasov_grid()?;
    let gauge = cfg.gauge.build(&grid)?;
    let reference = vlasov_reference(cfg, basket)?;
    log::info!("vlasov reference done");
    let targets: Vec<usize> = cfg
        .sample_times
        .iter()
        .map(|&t| steps_for(t, cfg.dt, "quantum"))
        .collect::<Result<_>>()?;
    let last = targets.iter().copied().max().unwrap_or(0);
    let nonlinearity = match cfg.poisson {
        Some(p) => Nonlinearity::Poisson(p),
        None => Nonlinearity::None,
    };
    let scfg = SolverConfig {
        dt: cfg.dt,
        t_end: last as f64 * cfg.dt,
        scheme: Scheme::StrangSplit,
        nonlinearity,
        spin_current_sign: cfg.spin_current_sign,
        ..SolverConfig::default()
    };
    let mut rows = Vec::new();
    let mut pairings = Vec::new();
    for (j, &t) in cfg.sample_times.iter().enumerate() {
        for (phi, v) in basket.functions.iter().zip(&reference.pairings[j]) {
            pairings.push(PairingRow {
                hbar: None,
                t,
                function: phi.name.clone(),
                value: *v,
            });
        }
    }
    for &hbar in &cfg.hbar_ladder {
        let mut state = cfg.initial.build(&grid, &cfg.datum, hbar, seed)?;
        let orbitals = state.len();
        let mut solver = PauliSolver::new(&state, &gauge, &scfg)?;
        for n in 0..=last {
            if n > 0 {
                solver.step(&mut state)?;
            }
            for (j, &k) in targets.iter().enumerate() {
                if k != n {
                    continue;
                }
                let t = cfg.sample_times[j];
                let q = pair_state_all(&state, basket);
                let distance = q
                    .iter()
                    .zip(&reference.pairings[j])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let rho = density(&state);
                let rho_c = decimate(rho.values(), &grid, &vg.x());
                let cur =
                    kinetic_current_coarse(&state, solver.gauge(), cfg.spin_current_sign, &vg.x())?;
                let cur_q: Vec<f64> = cur.concat();
                let cur_v: Vec<f64> = reference.current[j].concat();
                rows.push(SemiclassicalRow {
                    hbar,
                    t,
                    distance,
                    density_l2: rel_l2(&rho_c, &reference.density[j]),
                    current_l2: rel_l2(&cur_q, &cur_v),
                    orbitals,
                });
                for (phi, v) in basket.functions.iter().zip(&q) {
                    pairings.push(PairingRow {
                        hbar: Some(hbar),
                        t,
                        function: phi.name.clone(),
                        value: *v,
                    });
                }
            }
        }
        log::info!("hbar = {hbar}: {orbitals} orbitals done");
    }
    let slopes = cfg
        .sample_times
        .iter()
        .map(|&t| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.t == t)
                .map(|r| (r.hbar, r.distance))
                .collect();
            (t, log_slope(&pts))
        })
        .collect();
    Ok(SemiclassicalResult {
        rows,
        pairings,
        slopes,
    })
}
