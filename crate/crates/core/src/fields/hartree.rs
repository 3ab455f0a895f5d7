//! Hartree convolutions `W * rho` and the local X-alpha exchange surrogate.

use serde::{Deserialize, Serialize};

use super::poisson::FreeSpaceConvolution;
use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::field::{ScalarField, C64};
use crate::grid::UniformGrid;

const EVEN_TOL: f64 = 1e-12;

/// Pair interaction `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteractionKernel {
    /// `-lambda / |x|` in three dimensions.
    Coulomb3d { lambda: f64 },
    /// `-lambda / sqrt(|x|^2 + a^2)`.
    SoftenedCoulomb { lambda: f64, a: f64 },
    /// Values at grid coordinates: the table entry at position `x` is `W(x)`,
    /// with `x = 0` at the central index.
    #[serde(skip)]
    UserTable(ScalarField),
}

impl InteractionKernel {
    pub fn softened(lambda: f64, a: f64) -> Self {
        Self::SoftenedCoulomb { lambda, a }
    }

    /// `W` at a separation vector.
    pub fn eval(&self, r: [f64; 3]) -> Option<f64> {
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        match self {
            Self::Coulomb3d { lambda } => Some(-lambda / r2.sqrt()),
            Self::SoftenedCoulomb { lambda, a } => Some(-lambda / (r2 + a * a).sqrt()),
            Self::UserTable(_) => None,
        }
    }

    pub fn validate(&self, grid: &UniformGrid) -> Result<()> {
        match self {
            Self::Coulomb3d { lambda } => {
                if grid.dim() != 3 {
                    return Err(Error::Config(
                        "unsoftened Coulomb kernel requires three dimensions".into(),
                    ));
                }
                if !lambda.is_finite() {
                    return Err(Error::Config("kernel strength must be finite".into()));
                }
            }
            Self::SoftenedCoulomb { lambda, a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(Error::Config("softening length must be positive".into()));
                }
                if !lambda.is_finite() {
                    return Err(Error::Config("kernel strength must be finite".into()));
                }
            }
            Self::UserTable(t) => {
                grid.ensure_same(t.grid())?;
                let fft_order = centered_to_fft_order(t);
                let scale = 1.0 + t.max_abs();
                for idx in 0..grid.len() {
                    let i = grid.unravel(idx);
                    let mirror = grid.shifted(
                        [0; 3],
                        [-(i[0] as isize), -(i[1] as isize), -(i[2] as isize)],
                    );
                    if (fft_order[idx] - fft_order[mirror]).abs() > EVEN_TOL * scale {
                        return Err(Error::Config("interaction table is not even".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Reorders a centered table (offset 0 at index n/2) into FFT order
/// (offset 0 at index 0).
fn centered_to_fft_order(t: &ScalarField) -> Vec<f64> {
    let g = t.grid();
    let n = g.shape();
    let mut out = vec![0.0; g.len()];
    for idx in 0..g.len() {
        let i = g.unravel(idx);
        let j = [0, 1, 2].map(|a| (i[a] + n[a] - n[a] / 2) % n[a]);
        out[g.index(j)] = t.values()[idx];
    }
    out
}

#[derive(Debug, Clone)]
enum Backend {
    Periodic {
        fft: NdFft,
        kernel_hat: Vec<C64>,
    },
    FreeSpace {
        conv: FreeSpaceConvolution,
        scale: f64,
    },
}

/// Precomputed `rho -> W * rho` with `(W * rho)(x_i) = sum_j W(x_i - x_j) rho_j dV`.
///
/// Tabulated and softened kernels use the periodic (minimal image)
/// convolution; the bare 3-d Coulomb kernel uses the free-space solver.
#[derive(Debug, Clone)]
pub struct HartreeOperator {
    grid: UniformGrid,
    backend: Backend,
}

impl HartreeOperator {
    pub fn new(grid: &UniformGrid, kernel: &InteractionKernel) -> Result<Self> {
        kernel.validate(grid)?;
        let backend = match kernel {
            InteractionKernel::Coulomb3d { lambda } => Backend::FreeSpace {
                conv: FreeSpaceConvolution::new(grid)?,
                scale: -4.0 * std::f64::consts::PI * lambda,
            },
            _ => {
                let table = tabulate_fft_order(grid, kernel);
                let fft = NdFft::new(&grid.shape());
                let mut kernel_hat: Vec<C64> =
                    table.into_iter().map(|v| C64::new(v, 0.0)).collect();
                fft.forward_all(&mut kernel_hat);
                Backend::Periodic { fft, kernel_hat }
            }
        };
        Ok(Self {
            grid: *grid,
            backend,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub(crate) fn apply_raw(&self, rho: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Periodic { fft, kernel_hat } => {
                let mut buf: Vec<C64> = rho.iter().map(|&v| C64::new(v, 0.0)).collect();
                fft.forward_all(&mut buf);
                buf.iter_mut().zip(kernel_hat).for_each(|(b, k)| *b *= k);
                fft.inverse_all(&mut buf);
                let dv = self.grid.cell_volume();
                buf.into_iter().map(|v| v.re * dv).collect()
            }
            Backend::FreeSpace { conv, scale } => {
                conv.convolve(rho).into_iter().map(|v| v * scale).collect()
            }
        }
    }

    pub fn apply(&self, rho: &ScalarField) -> Result<ScalarField> {
        self.grid.ensure_same(rho.grid())?;
        ScalarField::new(self.grid, self.apply_raw(rho.values()))
    }
}

/// Kernel values at minimal-image offsets, offset 0 at index 0.
pub(crate) fn tabulate_fft_order(grid: &UniformGrid, kernel: &InteractionKernel) -> Vec<f64> {
    if let InteractionKernel::UserTable(t) = kernel {
        return centered_to_fft_order(t);
    }
    let n = grid.shape();
    let h = [0, 1, 2].map(|a| grid.spacing(a));
    (0..grid.len())
        .map(|idx| {
            let i = grid.unravel(idx);
            let r = [0, 1, 2].map(|a| {
                if a >= grid.dim() {
                    return 0.0;
                }
                let m = if i[a] < n[a] / 2 {
                    i[a] as f64
                } else {
                    i[a] as f64 - n[a] as f64
                };
                m * h[a]
            });
            kernel.eval(r).expect("analytic kernel")
        })
        .collect()
}

/// `W * rho` on the grid.
pub fn hartree_potential(rho: &ScalarField, kernel: &InteractionKernel) -> Result<ScalarField> {
    HartreeOperator::new(rho.grid(), kernel)?.apply(rho)
}

/// `-alpha rho^(1/3)` pointwise.
pub fn xalpha_potential(rho: &ScalarField, alpha: f64) -> Result<ScalarField> {
    if rho.values().iter().any(|&r| r < 0.0) {
        return Err(Error::InvalidField(
            "negative density in X-alpha potential".into(),
        ));
    }
    ScalarField::new(
        *rho.grid(),
        rho.values().iter().map(|r| -alpha * r.cbrt()).collect(),
    )
}

/// `-(3/4) alpha int rho^(4/3)`, the energy whose variation is the X-alpha potential.
pub fn xalpha_energy(rho: &ScalarField, alpha: f64) -> f64 {
    -0.75
        * alpha
        * rho
            .values()
            .iter()
            .map(|r| r.max(0.0).powf(4.0 / 3.0))
            .sum::<f64>()
        * rho.grid().cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_kernel_is_identity_times_cell_volume() {
        let g = UniformGrid::cubic(2, 16, 4.0).unwrap();
        let mut t = ScalarField::zeros(g);
        t.values_mut()[g.index([8, 8, 0])] = 1.0;
        let rho = ScalarField::from_fn(g, |x| (x[0] - 0.3 * x[1]).sin() + 2.0);
        let v = hartree_potential(&rho, &InteractionKernel::UserTable(t)).unwrap();
        for (a, b) in v.values().iter().zip(rho.values()) {
            assert!((a - b * g.cell_volume()).abs() < 1e-13);
        }
    }

    #[test]
    fn softened_point_source_matches_direct_sum() {
        let g = UniformGrid::cubic(1, 64, 8.0).unwrap();
        let (lambda, a) = (0.7, 0.1);
        let mut rho = ScalarField::zeros(g);
        rho.values_mut()[32] = 1.0 / g.cell_volume();
        let v = hartree_potential(&rho, &InteractionKernel::softened(lambda, a)).unwrap();
        for i in 0..64 {
            let mut x = g.coord(0, i);
            if x >= 4.0 {
                x -= 8.0;
            }
            let expect = -lambda / (x * x + a * a).sqrt();
            assert!((v.values()[i] - expect).abs() < 1e-6, "{i}");
        }
    }

    #[test]
    fn odd_table_rejected() {
        let g = UniformGrid::cubic(1, 16, 4.0).unwrap();
        let t = ScalarField::from_fn(g, |x| x[0]);
        assert!(
            hartree_potential(&ScalarField::zeros(g), &InteractionKernel::UserTable(t)).is_err()
        );
    }

    #[test]
    fn xalpha_cube_root() {
        let g = UniformGrid::cubic(1, 8, 1.0).unwrap();
        let v = xalpha_potential(&ScalarField::constant(g, 8.0), 1.0).unwrap();
        assert!(v.values().iter().all(|&x| (x + 2.0).abs() < 1e-15));
        assert!(xalpha_potential(&ScalarField::zeros(g), 1.0)
            .unwrap()
            .is_zero());
        assert!(xalpha_potential(&ScalarField::constant(g, -1.0), 1.0).is_err());
    }
}
