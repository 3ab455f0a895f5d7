use crate::error::Result;
use crate::field::ScalarField;
use crate::fields::{xalpha_energy, HartreeOperator, PoissonSolver};
use crate::grid::UniformGrid;

use super::config::Nonlinearity;

/// Density-to-potential map of a nonlinearity, with its interaction energy.
#[derive(Debug, Clone)]
pub enum SelfField {
    None,
    Poisson(PoissonSolver),
    Hartree(HartreeOperator),
    PoissonXalpha(PoissonSolver, f64),
}

impl SelfField {
    pub fn new(grid: &UniformGrid, nl: &Nonlinearity) -> Result<Self> {
        Ok(match nl {
            Nonlinearity::None => Self::None,
            Nonlinearity::Poisson(cfg) => Self::Poisson(PoissonSolver::new(grid, *cfg)?),
            Nonlinearity::Hartree { kernel } => Self::Hartree(HartreeOperator::new(grid, kernel)?),
            Nonlinearity::PoissonPlusXalpha { poisson, alpha } => {
                Self::PoissonXalpha(PoissonSolver::new(grid, *poisson)?, *alpha)
            }
        })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    /// Mean-field part of the potential (Poisson or Hartree) without the
    /// local exchange term.
    fn mean_field(&self, rho: &[f64]) -> Option<Vec<f64>> {
        match self {
            Self::None => None,
            Self::Poisson(p) | Self::PoissonXalpha(p, _) => {
                let c = p.config().coupling;
                Some(p.solve_raw(rho).into_iter().map(|v| v * c).collect())
            }
            Self::Hartree(h) => Some(h.apply_raw(rho)),
        }
    }

    /// Potential `V_sc[rho]`; `None` when there is no nonlinearity.
    pub fn potential(&self, rho: &ScalarField) -> Option<ScalarField> {
        let grid = *rho.grid();
        let mut v = self.mean_field(rho.values())?;
        if let Self::PoissonXalpha(_, alpha) = self {
            v.iter_mut()
                .zip(rho.values())
                .for_each(|(x, r)| *x -= alpha * r.max(0.0).cbrt());
        }
        Some(ScalarField::from_vec_unchecked(grid, v))
    }

    /// Interaction energy whose variation is the potential:
    /// `1/2 int rho V_mf` plus the X-alpha term.
    pub fn energy(&self, rho: &ScalarField) -> f64 {
        let Some(v) = self.mean_field(rho.values()) else {
            return 0.0;
        };
        let dv = rho.grid().cell_volume();
        let mut e = 0.5 * v.iter().zip(rho.values()).map(|(a, b)| a * b).sum::<f64>() * dv;
        if let Self::PoissonXalpha(_, alpha) = self {
            e += xalpha_energy(rho, *alpha);
        }
        e
    }
}
