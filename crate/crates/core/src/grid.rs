//! Uniform Cartesian grids.
//!
//! Values are stored row-major with axis 0 slowest. Axes beyond `dim` have a
//! single point and unit extent so that cell volumes and index arithmetic are
//! uniform across dimensions. Point `i` on axis `a` sits at `-L_a/2 + i h_a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of grid points of a single field.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    dim: usize,
    n: [usize; 3],
    extent: [f64; 3],
    periodic: [bool; 3],
}

impl UniformGrid {
    /// Periodic grid with the default point budget.
    pub fn new(dim: usize, points: &[usize], extent: &[f64]) -> Result<Self> {
        Self::with_budget(dim, points, extent, DEFAULT_POINT_BUDGET)
    }

    /// Same number of points and extent on every axis.
    pub fn cubic(dim: usize, points: usize, extent: f64) -> Result<Self> {
        Self::new(dim, &vec![points; dim], &vec![extent; dim])
    }

    pub fn with_budget(
        dim: usize,
        points: &[usize],
        extent: &[f64],
        budget: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if points.len() != dim || extent.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} axis sizes and extents, got {} and {}",
                points.len(),
                extent.len()
            )));
        }
        let mut n = [1usize; 3];
        let mut ext = [1.0f64; 3];
        for a in 0..dim {
            if points[a] < 2 || !points[a].is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: {} points is not a power of two >= 2",
                    points[a]
                )));
            }
            if !(extent[a].is_finite() && extent[a] > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: extent {} must be positive",
                    extent[a]
                )));
            }
            n[a] = points[a];
            ext[a] = extent[a];
        }
        let total: u128 = n.iter().map(|&v| v as u128).product();
        if total > budget as u128 {
            return Err(Error::Budget {
                requested: total,
                budget: budget as u128,
            });
        }
        Ok(Self {
            dim,
            n,
            extent: ext,
            periodic: [true; 3],
        })
    }

    /// Marks one axis as non-periodic. Spectral operators refuse such axes.
    pub fn with_open_axis(mut self, axis: usize) -> Self {
        self.periodic[axis] = false;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis, padded with ones beyond `dim`.
    pub fn shape(&self) -> [usize; 3] {
        self.n
    }

    pub fn points(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn extents(&self) -> [f64; 3] {
        self.extent
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.n[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if axis >= self.dim {
            return 0.0;
        }
        -0.5 * self.extent[axis] + i as f64 * self.spacing(axis)
    }

    /// Coordinates of one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.coord(axis, i)).collect()
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i2 = idx % self.n[2];
        let r = idx / self.n[2];
        [r / self.n[1], r % self.n[1], i2]
    }

    /// Index of `i + shift` with periodic wrap on every axis.
    #[inline]
    pub fn shifted(&self, i: [usize; 3], shift: [isize; 3]) -> usize {
        let mut j = [0usize; 3];
        for a in 0..3 {
            let n = self.n[a] as isize;
            j[a] = (i[a] as isize + shift[a]).rem_euclid(n) as usize;
        }
        self.index(j)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        [
            self.coord(0, i[0]),
            self.coord(1, i[1]),
            self.coord(2, i[2]),
        ]
    }

    /// Angular wavenumbers of one axis in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.n[axis];
        if n == 1 {
            return vec![0.0];
        }
        let dk = 2.0 * std::f64::consts::PI / self.extent[axis];
        (0..n)
            .map(|i| {
                let m = if i < n / 2 {
                    i as f64
                } else {
                    i as f64 - n as f64
                };
                m * dk
            })
            .collect()
    }

    /// Wavenumbers for first derivatives: the Nyquist entry is zeroed so that
    /// real fields keep real derivatives and the operator stays skew-adjoint.
    pub fn derivative_wavenumbers(&self, axis: usize) -> Vec<f64> {
        let mut k = self.wavenumbers(axis);
        let n = self.n[axis];
        if n > 1 {
            k[n / 2] = 0.0;
        }
        k
    }

    pub fn same_as(&self, other: &UniformGrid) -> bool {
        self == other
    }

    pub fn ensure_same(&self, other: &UniformGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(UniformGrid::new(1, &[12], &[1.0]).is_err());
        assert!(UniformGrid::new(2, &[16, 16], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn budget_enforced() {
        let err = UniformGrid::with_budget(3, &[64, 64, 64], &[1.0; 3], 1000).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn index_roundtrip_and_wrap() {
        let g = UniformGrid::new(3, &[4, 8, 2], &[1.0, 2.0, 3.0]).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index(g.unravel(idx)), idx);
        }
        assert_eq!(g.shifted([0, 0, 0], [-1, 8, 1]), g.index([3, 0, 1]));
        assert!((g.spacing(1) - 0.25).abs() < 1e-15);
        assert!((g.coord(0, 0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn padded_axes_have_unit_size() {
        let g = UniformGrid::cubic(1, 16, 2.0).unwrap();
        assert_eq!(g.shape(), [16, 1, 1]);
        assert!((g.cell_volume() - 0.125).abs() < 1e-15);
    }
}
