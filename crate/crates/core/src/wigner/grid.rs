use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{UniformGrid, DEFAULT_POINT_BUDGET};

/// Position grid paired with the momentum lattice dual to the offset lattice.
///
/// Offsets `s_m = m h/2`, `m in [-n, n)`, are half-steps of the position grid,
/// so `x +- s_m` always lands on the twice-refined grid. The momenta are
/// `xi_k = (k - n) pi hbar / L`, `k in [0, 2n)`, which makes
/// `2 xi_k s_m / hbar = 2 pi (k - n) m / (2n)` an exact DFT phase. Every
/// `hbar > 0` is admissible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    x: UniformGrid,
    hbar: f64,
}

impl PhaseSpaceGrid {
    pub fn new(x: UniformGrid, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidState(format!(
                "hbar = {hbar} must be positive"
            )));
        }
        for a in 0..x.dim() {
            if !x.is_periodic(a) {
                return Err(Error::NonPeriodicAxis(a));
            }
        }
        let g = Self { x, hbar };
        let total = g.len() as u128;
        if total > DEFAULT_POINT_BUDGET as u128 {
            return Err(Error::Budget {
                requested: total,
                budget: DEFAULT_POINT_BUDGET as u128,
            });
        }
        Ok(g)
    }

    pub fn x(&self) -> &UniformGrid {
        &self.x
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Momentum points per axis (`2n` on active axes, 1 elsewhere).
    pub fn xi_shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for (a, v) in s.iter_mut().enumerate().take(self.dim()) {
            *v = 2 * self.x.points(a);
        }
        s
    }

    pub fn xi_len(&self) -> usize {
        self.xi_shape().iter().product()
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.xi_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dxi(&self, axis: usize) -> f64 {
        std::f64::consts::PI * self.hbar / self.x.extent(axis)
    }

    pub fn xi(&self, axis: usize, k: usize) -> f64 {
        if axis >= self.dim() {
            return 0.0;
        }
        (k as f64 - self.x.points(axis) as f64) * self.dxi(axis)
    }

    pub fn xi_axis(&self, axis: usize) -> Vec<f64> {
        (0..self.xi_shape()[axis])
            .map(|k| self.xi(axis, k))
            .collect()
    }

    pub fn xi_unravel(&self, k: usize) -> [usize; 3] {
        let s = self.xi_shape();
        [k / (s[1] * s[2]), (k / s[2]) % s[1], k % s[2]]
    }

    pub fn xi_at(&self, k: usize) -> [f64; 3] {
        let i = self.xi_unravel(k);
        [self.xi(0, i[0]), self.xi(1, i[1]), self.xi(2, i[2])]
    }

    /// Momentum-space cell volume.
    pub fn xi_cell(&self) -> f64 {
        (0..self.dim()).map(|a| self.dxi(a)).product()
    }

    /// Phase-space cell volume.
    pub fn cell_volume(&self) -> f64 {
        self.x.cell_volume() * self.xi_cell()
    }

    /// Twice-refined position grid carrying the offset lattice.
    pub fn fine(&self) -> UniformGrid {
        let d = self.dim();
        let pts: Vec<usize> = (0..d).map(|a| 2 * self.x.points(a)).collect();
        let ext: Vec<f64> = (0..d).map(|a| self.x.extent(a)).collect();
        UniformGrid::with_budget(d, &pts, &ext, usize::MAX).expect("refined grid")
    }

    pub fn ensure_same(&self, other: &PhaseSpaceGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Real phase-space field, `values[ix * xi_len + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
}

impl PhaseSpaceField {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn([f64; 3], [f64; 3]) -> f64) -> Self {
        let nxi = grid.xi_len();
        let values = (0..grid.len())
            .map(|i| f(grid.x().position(i / nxi), grid.xi_at(i % nxi)))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
