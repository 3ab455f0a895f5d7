//! Poisson solvers: periodic with neutralizing background, and free-space
//! 3-d via a truncated Green's function on a doubled grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::field::{ScalarField, C64};
use crate::grid::UniformGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonMode {
    PeriodicZeroMean,
    FreeSpaceTruncatedKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoissonConfig {
    pub mode: PoissonMode,
    /// Multiplies the potential.
    pub coupling: f64,
    /// Softening length for reduced-dimension Coulomb-like kernels.
    pub softening: f64,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        Self {
            mode: PoissonMode::PeriodicZeroMean,
            coupling: 1.0,
            softening: 0.0,
        }
    }
}

impl PoissonConfig {
    pub fn periodic(coupling: f64) -> Self {
        Self {
            coupling,
            ..Self::default()
        }
    }

    pub fn free_space(coupling: f64) -> Self {
        Self {
            mode: PoissonMode::FreeSpaceTruncatedKernel,
            coupling,
            softening: 0.0,
        }
    }

    pub fn validate(&self, grid: &UniformGrid) -> Result<()> {
        if !self.coupling.is_finite() {
            return Err(Error::Config("Poisson coupling must be finite".into()));
        }
        if !(self.softening >= 0.0 && self.softening.is_finite()) {
            return Err(Error::Config("softening must be non-negative".into()));
        }
        if self.mode == PoissonMode::FreeSpaceTruncatedKernel && grid.dim() != 3 {
            return Err(Error::Config(
                "free-space Poisson is only available in three dimensions; use a softened Hartree kernel".into(),
            ));
        }
        Ok(())
    }
}

/// Aperiodic convolution with the truncated Coulomb kernel `1/(4 pi |x|)`.
///
/// The kernel `1_{|x|<R} / (4 pi |x|)` has the smooth transform
/// `2 (sin(|k| R / 2) / |k|)^2`; it is sampled on a 4x oversampled periodic
/// box, brought back to real space and restricted to the doubled grid used
/// for the zero-padded convolution.
#[derive(Debug, Clone)]
pub(crate) struct FreeSpaceConvolution {
    grid: UniformGrid,
    fft2: NdFft,
    kernel_hat: Vec<C64>,
}

impl FreeSpaceConvolution {
    pub(crate) fn new(grid: &UniformGrid) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::Config(
                "free-space kernel requires a 3-d grid".into(),
            ));
        }
        let n = grid.shape();
        let h = [0, 1, 2].map(|a| grid.spacing(a));
        let ext = grid.extents();
        let big = n.map(|v| 4 * v);
        let total: u128 = big.iter().map(|&v| v as u128).product();
        if total > crate::grid::DEFAULT_POINT_BUDGET as u128 {
            return Err(Error::Budget {
                requested: total,
                budget: crate::grid::DEFAULT_POINT_BUDGET as u128,
            });
        }
        let r = (ext[0] * ext[0] + ext[1] * ext[1] + ext[2] * ext[2]).sqrt();
        let kaxis: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                let m = big[a];
                let dk = 2.0 * std::f64::consts::PI / (4.0 * ext[a]);
                (0..m)
                    .map(|i| {
                        if i < m / 2 {
                            i as f64 * dk
                        } else {
                            (i as f64 - m as f64) * dk
                        }
                    })
                    .collect()
            })
            .collect();
        let mut g4 = vec![C64::new(0.0, 0.0); big[0] * big[1] * big[2]];
        for i0 in 0..big[0] {
            for i1 in 0..big[1] {
                for i2 in 0..big[2] {
                    let k =
                        (kaxis[0][i0].powi(2) + kaxis[1][i1].powi(2) + kaxis[2][i2].powi(2)).sqrt();
                    let v = if k == 0.0 {
                        0.5 * r * r
                    } else {
                        let s = (0.5 * k * r).sin() / k;
                        2.0 * s * s
                    };
                    g4[(i0 * big[1] + i1) * big[2] + i2] = C64::new(v, 0.0);
                }
            }
        }
        let fft4 = NdFft::new(&big);
        fft4.inverse_all(&mut g4);
        let inv_cell = 1.0 / (h[0] * h[1] * h[2]);
        let dbl = n.map(|v| 2 * v);
        let mut g2 = vec![C64::new(0.0, 0.0); dbl[0] * dbl[1] * dbl[2]];
        let wrap = |m: usize, nn: usize, size: usize| -> usize {
            let off = if m < nn {
                m as isize
            } else {
                m as isize - 2 * nn as isize
            };
            off.rem_euclid(size as isize) as usize
        };
        for j0 in 0..dbl[0] {
            let s0 = wrap(j0, n[0], big[0]);
            for j1 in 0..dbl[1] {
                let s1 = wrap(j1, n[1], big[1]);
                for j2 in 0..dbl[2] {
                    let s2 = wrap(j2, n[2], big[2]);
                    g2[(j0 * dbl[1] + j1) * dbl[2] + j2] =
                        g4[(s0 * big[1] + s1) * big[2] + s2] * inv_cell;
                }
            }
        }
        let fft2 = NdFft::new(&dbl);
        fft2.forward_all(&mut g2);
        Ok(Self {
            grid: *grid,
            fft2,
            kernel_hat: g2,
        })
    }

    /// `sum_y G(x - y) rho(y) dV` for `x` on the grid.
    pub(crate) fn convolve(&self, rho: &[f64]) -> Vec<f64> {
        let n = self.grid.shape();
        let dbl = n.map(|v| 2 * v);
        let mut buf = vec![C64::new(0.0, 0.0); dbl[0] * dbl[1] * dbl[2]];
        for i0 in 0..n[0] {
            for i1 in 0..n[1] {
                for i2 in 0..n[2] {
                    buf[(i0 * dbl[1] + i1) * dbl[2] + i2] =
                        C64::new(rho[(i0 * n[1] + i1) * n[2] + i2], 0.0);
                }
            }
        }
        self.fft2.forward_all(&mut buf);
        buf.iter_mut()
            .zip(&self.kernel_hat)
            .for_each(|(b, k)| *b *= k);
        self.fft2.inverse_all(&mut buf);
        let dv = self.grid.cell_volume();
        let mut out = vec![0.0; self.grid.len()];
        for i0 in 0..n[0] {
            for i1 in 0..n[1] {
                for i2 in 0..n[2] {
                    out[(i0 * n[1] + i1) * n[2] + i2] =
                        buf[(i0 * dbl[1] + i1) * dbl[2] + i2].re * dv;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Periodic { fft: NdFft, inv_k2: Vec<f64> },
    FreeSpace(FreeSpaceConvolution),
}

/// Reusable Poisson solver for one grid and configuration.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    grid: UniformGrid,
    cfg: PoissonConfig,
    backend: Backend,
}

impl PoissonSolver {
    pub fn new(grid: &UniformGrid, cfg: PoissonConfig) -> Result<Self> {
        cfg.validate(grid)?;
        let backend = match cfg.mode {
            PoissonMode::PeriodicZeroMean => {
                for a in 0..grid.dim() {
                    if !grid.is_periodic(a) {
                        return Err(Error::NonPeriodicAxis(a));
                    }
                }
                let k = [0, 1, 2].map(|a| grid.wavenumbers(a));
                let inv_k2 = (0..grid.len())
                    .map(|idx| {
                        let i = grid.unravel(idx);
                        let k2: f64 = (0..3).map(|a| k[a][i[a]].powi(2)).sum();
                        if k2 == 0.0 {
                            0.0
                        } else {
                            1.0 / k2
                        }
                    })
                    .collect();
                Backend::Periodic {
                    fft: NdFft::new(&grid.shape()),
                    inv_k2,
                }
            }
            PoissonMode::FreeSpaceTruncatedKernel => {
                Backend::FreeSpace(FreeSpaceConvolution::new(grid)?)
            }
        };
        Ok(Self {
            grid: *grid,
            cfg,
            backend,
        })
    }

    pub fn config(&self) -> &PoissonConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    /// Unscaled solve of `-Delta V = rho` (coupling not applied).
    pub(crate) fn solve_raw(&self, rho: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Periodic { fft, inv_k2 } => {
                let mut buf: Vec<C64> = rho.iter().map(|&v| C64::new(v, 0.0)).collect();
                fft.forward_all(&mut buf);
                buf.iter_mut().zip(inv_k2).for_each(|(b, w)| *b *= w);
                fft.inverse_all(&mut buf);
                buf.into_iter().map(|v| v.re).collect()
            }
            Backend::FreeSpace(conv) => conv.convolve(rho),
        }
    }

    pub fn solve(&self, rho: &ScalarField) -> Result<ScalarField> {
        self.grid.ensure_same(rho.grid())?;
        let mut v = self.solve_raw(rho.values());
        if self.cfg.coupling != 1.0 {
            v.iter_mut().for_each(|x| *x *= self.cfg.coupling);
        }
        ScalarField::new(self.grid, v)
    }
}

/// `-Delta V = coupling * (rho - mean rho)` on a periodic box, or
/// `V = coupling * rho * 1/(4 pi |x|)` in free space.
pub fn solve_poisson(rho: &ScalarField, cfg: &PoissonConfig) -> Result<ScalarField> {
    PoissonSolver::new(rho.grid(), *cfg)?.solve(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::laplacian;
    use std::f64::consts::PI;

    #[test]
    fn zero_density_gives_zero_potential() {
        let g = UniformGrid::cubic(2, 16, 3.0).unwrap();
        let v = solve_poisson(&ScalarField::zeros(g), &PoissonConfig::default()).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn single_mode() {
        let l = 4.0;
        let g = UniformGrid::cubic(2, 32, l).unwrap();
        let k = 2.0 * PI / l;
        let rho = ScalarField::from_fn(g, |x| {
            (k * x[0]).cos() * (1.0 + 0.5 * (2.0 * k * x[1]).sin())
        });
        let v = solve_poisson(&rho, &PoissonConfig::default()).unwrap();
        for i in 0..g.len() {
            let x = g.position(i);
            let expect = (k * x[0]).cos() / (k * k)
                + 0.5 * (k * x[0]).cos() * (2.0 * k * x[1]).sin() / (5.0 * k * k);
            assert!((v.values()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_residual() {
        let g = UniformGrid::cubic(3, 16, 6.0).unwrap();
        let rho = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp());
        let v = solve_poisson(&rho, &PoissonConfig::default()).unwrap();
        let lap = laplacian(&v).unwrap();
        let mean = rho.mean();
        let res: f64 = lap
            .values()
            .iter()
            .zip(rho.values())
            .map(|(l, r)| (l + r - mean).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = rho.values().iter().map(|r| r * r).sum::<f64>().sqrt();
        assert!(res <= 1e-8 * norm);
    }

    #[test]
    fn free_space_requires_three_dimensions() {
        let g = UniformGrid::cubic(2, 8, 1.0).unwrap();
        assert!(solve_poisson(&ScalarField::zeros(g), &PoissonConfig::free_space(1.0)).is_err());
    }
}
