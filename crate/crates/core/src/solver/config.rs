use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{InteractionKernel, PoissonConfig, PoisswellConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    StrangSplit,
    Rk4Pseudospectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    None,
    Poisson(PoissonConfig),
    Hartree { kernel: InteractionKernel },
    PoissonPlusXalpha { poisson: PoissonConfig, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub nonlinearity: Nonlinearity,
    pub poisswell: Option<PoisswellConfig>,
    /// Density snapshots every `snapshot_stride` steps; 0 disables them.
    pub snapshot_stride: usize,
    /// Energy reports every `report_stride` steps (at least 1).
    pub report_stride: usize,
    pub spin_current_sign: f64,
    /// Abort when `|E(t) - E(0)|` exceeds this factor times `max(|E(0)|, 1)`.
    pub blowup_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::StrangSplit,
            nonlinearity: Nonlinearity::None,
            poisswell: None,
            snapshot_stride: 0,
            report_stride: 1,
            spin_current_sign: 1.0,
            blowup_factor: 1e3,
        }
    }
}

impl SolverConfig {
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
        if self.spin_current_sign != 1.0 && self.spin_current_sign != -1.0 {
            return Err(Error::Config("spin_current_sign must be +1 or -1".into()));
        }
        if self.report_stride == 0 {
            return Err(Error::Config("report_stride must be at least 1".into()));
        }
        if !(self.blowup_factor > 0.0) {
            return Err(Error::Config("blowup_factor must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end` (rounded to the nearest integer).
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}
