use rayon::prelude::*;
use serde::Serialize;

use super::density::{PhaseSpaceDensity, VlasovGrid};
use super::spline::{shift_axis, shift_axis_serial};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fields::{PoissonConfig, PoissonSolver};
use crate::gauge::GaugeField;
use crate::spectral::Spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct VlasovConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Self-consistent field `-Delta V = coupling (rho - mean rho)`; `None` for linear transport.
    pub poisson: Option<PoissonConfig>,
    /// Clip negative undershoots and rescale to restore the mass.
    pub clip_undershoot: bool,
    /// Width in cells of the momentum-window rim monitored for leakage.
    pub edge_width: usize,
    /// Abort when the rim holds more than this fraction of the mass.
    pub max_edge_fraction: f64,
    pub report_stride: usize,
}

impl Default for VlasovConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 1.0,
            poisson: None,
            clip_undershoot: true,
            edge_width: 2,
            max_edge_fraction: 1e-6,
            report_stride: 1,
        }
    }
}

impl VlasovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.report_stride == 0 {
            return Err(Error::Config("report_stride must be at least 1".into()));
        }
        if !(self.max_edge_fraction > 0.0) {
            return Err(Error::Config("max_edge_fraction must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// External scalar potential and out-of-plane magnetic field on the position grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LorentzFields {
    pub v_ext: Option<ScalarField>,
    /// `B_z(x)`; only meaningful in 2d2v.
    pub b: Option<ScalarField>,
}

impl LorentzFields {
    pub fn none() -> Self {
        Self::default()
    }

    /// Takes `V_ext` and `B_z` from a gauge field.
    pub fn from_gauge(gauge: &GaugeField) -> Self {
        let v = gauge.v_ext();
        let bz = gauge.b().component_field(2);
        Self {
            v_ext: (!v.is_zero()).then(|| v.clone()),
            b: (gauge.grid().dim() >= 2 && !bz.is_zero()).then_some(bz),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VlasovReport {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub field: f64,
    pub external: f64,
    /// Mass removed by clipping during the last step (before rescaling).
    pub clipped: f64,
    pub edge_mass: f64,
}

impl VlasovReport {
    pub fn total_energy(&self) -> f64 {
        self.kinetic + self.field + self.external
    }
}

/// Strang-split semi-Lagrangian solver for
/// `df/dt + p.grad_x f + (-grad V + p x B).grad_p f = 0`.
#[derive(Debug, Clone)]
pub struct VlasovSolver {
    grid: VlasovGrid,
    cfg: VlasovConfig,
    fields: LorentzFields,
    spectral: Spectral,
    poisson: Option<PoissonSolver>,
    step: usize,
    clipped: f64,
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl VlasovSolver {
    pub fn new(grid: VlasovGrid, fields: LorentzFields, cfg: &VlasovConfig) -> Result<Self> {
        cfg.validate()?;
        let xg = *grid.x();
        if let Some(v) = &fields.v_ext {
            xg.ensure_same(v.grid())?;
        }
        if let Some(b) = &fields.b {
            xg.ensure_same(b.grid())?;
            if grid.dim() != 2 {
                return Err(Error::Config(
                    "a magnetic field needs the 2d2v geometry".into(),
                ));
            }
        }
        let poisson = cfg
            .poisson
            .map(|p| PoissonSolver::new(&xg, p))
            .transpose()?;
        Ok(Self {
            grid,
            cfg: cfg.clone(),
            fields,
            spectral: Spectral::new(&xg),
            poisson,
            step: 0,
            clipped: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn config(&self) -> &VlasovConfig {
        &self.cfg
    }

    /// Self-consistent potential of `rho`, if any.
    pub fn self_potential(&self, rho: &ScalarField) -> Result<Option<ScalarField>> {
        self.poisson.as_ref().map(|p| p.solve(rho)).transpose()
    }

    fn potential(&self, rho: &ScalarField) -> Result<Option<ScalarField>> {
        let vs = self.self_potential(rho)?;
        Ok(match (vs, &self.fields.v_ext) {
            (Some(a), Some(b)) => Some(a.zip_with(b, |x, y| x + y)?),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        })
    }

    fn advect_x(&self, f: &mut PhaseSpaceDensity, tau: f64) {
        let g = self.grid;
        let d = g.dim();
        let shape = g.shape();
        for a in 0..d {
            let h = g.x().spacing(a);
            let p = g.p().axis_coords(a);
            shift_axis(f.values_mut(), &shape, a, &|idx: &[usize]| {
                p[idx[d + a]] * tau / h
            });
        }
    }

    fn advect_p(&self, f: &mut PhaseSpaceDensity, e: &[Vec<f64>], tau: f64) {
        let g = self.grid;
        let d = g.dim();
        if d == 1 {
            let h = g.p().spacing(0);
            shift_axis(f.values_mut(), &g.shape(), 1, &|idx: &[usize]| {
                e[0][idx[0]] * tau / h
            });
            return;
        }
        let np = g.p().len();
        let pshape = [g.p().points(0), g.p().points(1)];
        let hp = [g.p().spacing(0), g.p().spacing(1)];
        let pc = [g.p().axis_coords(0), g.p().axis_coords(1)];
        let b = self.fields.b.as_ref().map(|b| b.values());
        f.values_mut()
            .par_chunks_mut(np)
            .enumerate()
            .for_each(|(ix, block)| {
                let bz = b.map_or(0.0, |b| b[ix]);
                let ex = [e[0][ix], e[1][ix]];
                // p(tau) = R(phi) p + disp, with phi = -B tau.
                let phi = -bz * tau;
                let s = tau * sinc(bz * tau);
                let c = 0.5 * bz * tau * tau * sinc(0.5 * bz * tau).powi(2);
                let disp = [s * ex[0] + c * ex[1], -c * ex[0] + s * ex[1]];
                let alpha = -(0.5 * phi).tan();
                let beta = phi.sin();
                let c1 = disp[0] - alpha * disp[1];
                let c2 = disp[1];
                if phi != 0.0 {
                    shift_axis_serial(block, &pshape, 0, &|idx: &[usize]| {
                        alpha * pc[1][idx[1]] / hp[0]
                    });
                }
                shift_axis_serial(block, &pshape, 1, &|idx: &[usize]| {
                    (beta * pc[0][idx[0]] + c2) / hp[1]
                });
                shift_axis_serial(block, &pshape, 0, &|idx: &[usize]| {
                    (alpha * pc[1][idx[1]] + c1) / hp[0]
                });
            });
    }

    fn electric_field(&self, rho: &ScalarField) -> Result<Vec<Vec<f64>>> {
        let d = self.grid.dim();
        let n = self.grid.x().len();
        match self.potential(rho)? {
            Some(v) => {
                let grad = self.spectral.gradient(&v)?;
                Ok((0..d)
                    .map(|a| grad.component(a).iter().map(|x| -x).collect())
                    .collect())
            }
            None => Ok(vec![vec![0.0; n]; d]),
        }
    }

    fn clip(&mut self, f: &mut PhaseSpaceDensity) {
        let vals = f.values_mut();
        let neg: f64 = vals.iter().filter(|v| **v < 0.0).sum();
        if neg == 0.0 {
            self.clipped = 0.0;
            return;
        }
        let before: f64 = vals.iter().sum();
        vals.iter_mut().for_each(|v| *v = v.max(0.0));
        let after = before - neg;
        let scale = before / after;
        vals.iter_mut().for_each(|v| *v *= scale);
        self.clipped = -neg * self.grid.cell_volume();
        log::debug!(
            "step {}: clipped undershoot mass {:e}, rescaled by {}",
            self.step,
            self.clipped,
            scale
        );
    }

    /// One Strang step: half x-advection, momentum advection in the field of
    /// the intermediate density, half x-advection.
    pub fn step(&mut self, f: &mut PhaseSpaceDensity) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let dt = self.cfg.dt;
        self.advect_x(f, 0.5 * dt);
        let e = self.electric_field(&f.density())?;
        self.advect_p(f, &e, dt);
        self.advect_x(f, 0.5 * dt);
        self.step += 1;
        if self.cfg.clip_undershoot {
            self.clip(f);
        }
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite phase-space density at step {}",
                self.step
            )));
        }
        let edge = f.edge_mass(self.cfg.edge_width);
        if edge > self.cfg.max_edge_fraction * f.mass().abs() {
            return Err(Error::OutOfBand(edge));
        }
        Ok(())
    }

    pub fn report(&self, f: &PhaseSpaceDensity) -> Result<VlasovReport> {
        let rho = f.density();
        let dv = self.grid.x().cell_volume();
        let field = self.self_potential(&rho)?.map_or(0.0, |v| {
            0.5 * v
                .values()
                .iter()
                .zip(rho.values())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * dv
        });
        let external = self.fields.v_ext.as_ref().map_or(0.0, |v| {
            v.values()
                .iter()
                .zip(rho.values())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * dv
        });
        Ok(VlasovReport {
            step: self.step,
            time: self.time(),
            mass: f.mass(),
            kinetic: f.kinetic_energy(),
            field,
            external,
            clipped: self.clipped,
            edge_mass: f.edge_mass(self.cfg.edge_width),
        })
    }
}

#[derive(Debug, Clone)]
pub struct VlasovTrajectory {
    pub reports: Vec<VlasovReport>,
    pub final_state: PhaseSpaceDensity,
}

/// Runs the solver to `t_end`, calling `observe` after every step (and once
/// before the first) with the report when one is due.
pub fn vlasov_propagate_with<F>(
    f0: &PhaseSpaceDensity,
    fields: LorentzFields,
    cfg: &VlasovConfig,
    mut observe: F,
) -> Result<VlasovTrajectory>
where
    F: FnMut(&VlasovSolver, &PhaseSpaceDensity, Option<&VlasovReport>) -> Result<()>,
{
    let mut solver = VlasovSolver::new(*f0.grid(), fields, cfg)?;
    let mut f = f0.clone();
    let steps = cfg.steps();
    let mut reports = Vec::new();
    for n in 0..=steps {
        if n > 0 {
            solver.step(&mut f)?;
        }
        if n % cfg.report_stride == 0 || n == steps {
            let r = solver.report(&f)?;
            observe(&solver, &f, Some(&r))?;
            reports.push(r);
        } else {
            observe(&solver, &f, None)?;
        }
    }
    Ok(VlasovTrajectory {
        reports,
        final_state: f,
    })
}

pub fn vlasov_poisson_propagate(
    f0: &PhaseSpaceDensity,
    fields: LorentzFields,
    cfg: &VlasovConfig,
) -> Result<VlasovTrajectory> {
    vlasov_propagate_with(f0, fields, cfg, |_, _, _| Ok(()))
}
