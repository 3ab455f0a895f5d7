use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::fields::poisswell_update;
use crate::gauge::GaugeField;
use crate::observables::{EnergyBreakdown, PauliHamiltonian};
use crate::state::{density, density_of, MixedState};

use super::config::{Scheme, SolverConfig};
use super::selfconsistent::SelfField;
use super::step::{rk4_orbitals, rk4_stability_budget, StrangFactors};

/// Monitors after one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub energy: EnergyBreakdown,
    /// Magnetostatic fixed-point iterations spent in this step.
    pub iterations: usize,
    /// Largest orbital norm error.
    pub norm_drift: f64,
}

impl StepReport {
    pub fn total_energy(&self) -> f64 {
        self.energy.total()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub reports: Vec<StepReport>,
    pub final_state: MixedState,
    /// `(time, density)` at the configured stride.
    pub snapshots: Vec<(f64, ScalarField)>,
}

/// Stateful propagator for one mixed state.
#[derive(Debug, Clone)]
pub struct PauliSolver {
    cfg: SolverConfig,
    hbar: f64,
    external: GaugeField,
    a_self: VectorField,
    hamiltonian: PauliHamiltonian,
    strang: Option<StrangFactors>,
    field: SelfField,
    v_sc: Option<ScalarField>,
    step: usize,
    iterations: usize,
    initial_energy: Option<f64>,
}

impl PauliSolver {
    pub fn new(state: &MixedState, gauge: &GaugeField, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = *state.grid();
        grid.ensure_same(gauge.grid())?;
        let hbar = state.hbar();
        let field = SelfField::new(&grid, &cfg.nonlinearity)?;
        let v_sc = field.potential(&density(state));
        let mut solver = Self {
            cfg: cfg.clone(),
            hbar,
            external: gauge.clone(),
            a_self: VectorField::zeros(grid),
            hamiltonian: PauliHamiltonian::new(gauge, hbar)?,
            strang: None,
            field,
            v_sc,
            step: 0,
            iterations: 0,
            initial_energy: None,
        };
        if cfg.poisswell.is_some() {
            solver.update_magnetostatics(state)?;
        }
        match cfg.scheme {
            Scheme::StrangSplit => {
                solver.strang = Some(StrangFactors::new(
                    solver.hamiltonian.gauge(),
                    hbar,
                    cfg.dt,
                )?);
            }
            Scheme::Rk4Pseudospectral => {
                let vmax = solver.v_sc.as_ref().map_or(0.0, |v| v.max_abs());
                let budget = rk4_stability_budget(solver.hamiltonian.gauge(), vmax, hbar);
                if cfg.dt > budget {
                    return Err(Error::Stability { dt: cfg.dt, budget });
                }
            }
        }
        Ok(solver)
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Total gauge field currently acting (external plus self-generated).
    pub fn gauge(&self) -> &GaugeField {
        self.hamiltonian.gauge()
    }

    pub fn self_generated_potential(&self) -> &VectorField {
        &self.a_self
    }

    pub fn potential(&self) -> Option<&ScalarField> {
        self.v_sc.as_ref()
    }

    pub fn hamiltonian(&self) -> &PauliHamiltonian {
        &self.hamiltonian
    }

    fn update_magnetostatics(&mut self, state: &MixedState) -> Result<()> {
        let Some(pw) = self.cfg.poisswell else {
            return Ok(());
        };
        let mut pw = pw;
        pw.spin_current_sign = self.cfg.spin_current_sign;
        let out = poisswell_update(state, &self.external, &self.a_self, &pw)?;
        self.iterations = out.iterations;
        let changed = out.a_self != self.a_self;
        self.a_self = out.a_self;
        if changed {
            self.hamiltonian = PauliHamiltonian::new(&out.gauge, self.hbar)?;
            if self.cfg.scheme == Scheme::StrangSplit {
                self.strang = Some(StrangFactors::new(&out.gauge, self.hbar, self.cfg.dt)?);
            }
        }
        Ok(())
    }

    /// Advances the state by one step.
    pub fn step(&mut self, state: &mut MixedState) -> Result<()> {
        if self.step > 0 {
            self.update_magnetostatics(state)?;
        }
        match self.cfg.scheme {
            Scheme::StrangSplit => {
                let f = self.strang.as_ref().expect("strang factors");
                let v = self.v_sc.as_ref();
                state.orbitals_mut().par_iter_mut().for_each(|p| {
                    f.half_potential(p, v);
                    f.kinetic(p);
                });
                self.v_sc = self.field.potential(&density(state));
                let v = self.v_sc.as_ref();
                state
                    .orbitals_mut()
                    .par_iter_mut()
                    .for_each(|p| f.half_potential(p, v));
            }
            Scheme::Rk4Pseudospectral => {
                let weights = state.weights().to_vec();
                let field = &self.field;
                let next =
                    rk4_orbitals(&self.hamiltonian, state.orbitals(), self.cfg.dt, |psis| {
                        field.potential(&density_of(psis, &weights))
                    })?;
                state.replace_orbitals(next);
                self.v_sc = self.field.potential(&density(state));
            }
        }
        self.step += 1;
        if state.orbitals().iter().any(|p| !p.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite wave function at step {}",
                self.step
            )));
        }
        Ok(())
    }

    /// Energies, mass and norm drift of the current state.
    pub fn report(&mut self, state: &MixedState) -> Result<StepReport> {
        let [kinetic, stern_gerlach, external] = self.hamiltonian.state_energies(state);
        let rho = density(state);
        let energy = EnergyBreakdown {
            kinetic,
            stern_gerlach,
            external,
            self_energy: self.field.energy(&rho),
        };
        let total = energy.total();
        let time = self.time();
        match self.initial_energy {
            None => self.initial_energy = Some(total),
            Some(e0) => {
                if !total.is_finite()
                    || (total - e0).abs() > self.cfg.blowup_factor * e0.abs().max(1.0)
                {
                    return Err(Error::EnergyBlowUp {
                        time,
                        energy: total,
                        initial: e0,
                    });
                }
            }
        }
        Ok(StepReport {
            step: self.step,
            time,
            mass: state.mass(),
            energy,
            iterations: self.iterations,
            norm_drift: state.max_norm_error(),
        })
    }
}

/// Runs to `t_end`, calling `observe(solver, state, report)` at step 0 and
/// after every step; `report` is present at the configured report stride.
pub fn propagate_with<F>(
    state: &MixedState,
    gauge: &GaugeField,
    cfg: &SolverConfig,
    mut observe: F,
) -> Result<Trajectory>
where
    F: FnMut(&PauliSolver, &MixedState, Option<&StepReport>) -> Result<()>,
{
    let mut solver = PauliSolver::new(state, gauge, cfg)?;
    let mut state = state.clone();
    let mut reports = Vec::new();
    let mut snapshots = Vec::new();
    let steps = cfg.steps();
    for n in 0..=steps {
        if n > 0 {
            solver.step(&mut state)?;
        }
        let report = if n % cfg.report_stride == 0 || n == steps {
            let r = solver.report(&state)?;
            reports.push(r);
            Some(r)
        } else {
            None
        };
        if cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0 {
            snapshots.push((solver.time(), density(&state)));
        }
        observe(&solver, &state, report.as_ref())?;
    }
    Ok(Trajectory {
        reports,
        final_state: state,
        snapshots,
    })
}

pub fn propagate(state: &MixedState, gauge: &GaugeField, cfg: &SolverConfig) -> Result<Trajectory> {
    propagate_with(state, gauge, cfg, |_, _, _| Ok(()))
}
