//! Quasi-static magnetostatic coupling `-Delta A = J(Psi, A)` solved by
//! damped Picard iteration on the self-generated part of `A`.

use serde::{Deserialize, Serialize};

use super::poisson::{PoissonConfig, PoissonSolver};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::gauge::GaugeField;
use crate::observables::PauliHamiltonian;
use crate::state::MixedState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoisswellConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the previous iterate: `A <- (1 - w) T(A) + w A`.
    pub damping: f64,
    pub coupling: f64,
    pub spin_current_sign: f64,
}

impl Default for PoisswellConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            damping: 0.0,
            coupling: 1.0,
            spin_current_sign: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoisswellOutcome {
    /// External plus self-generated potential.
    pub gauge: GaugeField,
    pub a_self: VectorField,
    pub iterations: usize,
    pub residual: f64,
    /// Relative update size after each iteration.
    pub history: Vec<f64>,
}

/// Iterates `A_self <- coupling (-Delta)^{-1} (J(Psi, A_ext + A_self) - mean J)`
/// starting from `a_prev` until the relative update drops to `tol`.
pub fn poisswell_update(
    state: &MixedState,
    external: &GaugeField,
    a_prev: &VectorField,
    cfg: &PoisswellConfig,
) -> Result<PoisswellOutcome> {
    let grid = *external.grid();
    grid.ensure_same(state.grid())?;
    grid.ensure_same(a_prev.grid())?;
    if grid.dim() < 2 {
        return Err(Error::Config(
            "magnetostatic coupling needs at least two dimensions".into(),
        ));
    }
    if !(0.0..1.0).contains(&cfg.damping) {
        return Err(Error::Config("damping must lie in [0, 1)".into()));
    }
    let poisson = PoissonSolver::new(&grid, PoissonConfig::periodic(cfg.coupling))?;
    let mut a = a_prev.clone();
    let mut history = Vec::new();
    for it in 1..=cfg.max_iter {
        let gauge = external.with_periodic(external.periodic().add(&a)?)?;
        let j =
            PauliHamiltonian::new(&gauge, state.hbar())?.current(state, cfg.spin_current_sign)?;
        let mut next = VectorField::zeros(grid);
        for c in 0..3 {
            let sol = poisson.solve(&j.component_field(c))?;
            next.component_mut(c).copy_from_slice(sol.values());
        }
        if cfg.damping > 0.0 {
            next = next.scaled(1.0 - cfg.damping).add(&a.scaled(cfg.damping))?;
        }
        let diff = next.sub(&a)?.l2_norm();
        let base = a.l2_norm();
        let residual = if diff == 0.0 {
            0.0
        } else if base == 0.0 {
            f64::INFINITY
        } else {
            diff / base
        };
        history.push(residual);
        a = next;
        if diff <= cfg.tol * base {
            let gauge = external.with_periodic(external.periodic().add(&a)?)?;
            return Ok(PoisswellOutcome {
                gauge,
                a_self: a,
                iterations: it,
                residual,
                history,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}
