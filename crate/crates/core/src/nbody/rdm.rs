use nalgebra::{DMatrix, SymmetricEigen};

use super::wavefunction::{NBodyWavefunction, Orbital};
use crate::error::{Error, Result};
use crate::field::C64;
use crate::grid::UniformGrid;

/// Largest matrix dimension handed to the dense eigensolver.
pub const MAX_RDM_DIM: usize = 4096;

/// k-particle reduced density matrix in the orthonormal grid basis
/// (entries `dx^k rho(q, q')`), normalized to unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    k: usize,
    grid: UniformGrid,
    spin: bool,
    matrix: DMatrix<C64>,
}

fn local_dim(grid: &UniformGrid, spin: bool) -> usize {
    grid.points(0) * if spin { 2 } else { 1 }
}

impl ReducedDensityMatrix {
    /// Wraps a matrix and rescales it to unit trace.
    pub fn from_matrix(
        k: usize,
        grid: UniformGrid,
        spin: bool,
        matrix: DMatrix<C64>,
    ) -> Result<Self> {
        let dim = local_dim(&grid, spin).pow(k as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix for a {k}-particle marginal of dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let tr = matrix.trace().re;
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::InvalidState(
                "density matrix has non-positive trace".into(),
            ));
        }
        Ok(Self {
            k,
            grid,
            spin,
            matrix: matrix / C64::new(tr, 0.0),
        })
    }

    /// `(|psi><psi|)^{(x)k}` for a single orbital.
    pub fn pure_product(
        orbital: &Orbital,
        k: usize,
        grid: UniformGrid,
        spin: bool,
    ) -> Result<Self> {
        let m = local_dim(&grid, spin);
        if orbital.len() != m {
            return Err(Error::InvalidState(format!(
                "orbital has {} values, expected {m}",
                orbital.len()
            )));
        }
        let dim = m.pow(k as u32);
        if dim > MAX_RDM_DIM {
            return Err(Error::Budget {
                requested: dim as u128,
                budget: MAX_RDM_DIM as u128,
            });
        }
        let v: Vec<C64> = (0..dim)
            .map(|mut idx| {
                let mut p = C64::new(1.0, 0.0);
                for _ in 0..k {
                    p *= orbital[idx % m];
                    idx /= m;
                }
                p
            })
            .collect();
        let c = nalgebra::DVector::from_vec(v);
        Self::from_matrix(k, grid, spin, &c * c.adjoint())
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn spin(&self) -> bool {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    if m.nrows() > MAX_RDM_DIM {
        return Err(Error::Budget {
            requested: m.nrows() as u128,
            budget: MAX_RDM_DIM as u128,
        });
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Marginal over particles `k+1..N` (the first `k` particles are kept).
pub fn reduced_density_matrix(psi: &NBodyWavefunction, k: usize) -> Result<ReducedDensityMatrix> {
    let n = psi.n_particles();
    if k == 0 || k > n {
        return Err(Error::Config(format!(
            "marginal order {k} must be in 1..={n}"
        )));
    }
    let m = psi.local_dim();
    let rows = m.pow(k as u32);
    if rows > MAX_RDM_DIM {
        return Err(Error::Budget {
            requested: rows as u128,
            budget: MAX_RDM_DIM as u128,
        });
    }
    let cols = psi.values().len() / rows;
    let a = DMatrix::from_row_slice(rows, cols, psi.values());
    let rho = &a * a.adjoint();
    ReducedDensityMatrix::from_matrix(k, *psi.grid(), psi.spin(), rho)
}

/// `1/2 sum |eig(rho1 - rho2)|`.
pub fn trace_distance(a: &ReducedDensityMatrix, b: &ReducedDensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() || a.k != b.k || a.spin != b.spin || !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    trace_distance_matrices(&a.matrix, &b.matrix)
}

/// Trace distance of two Hermitian matrices of equal size.
pub fn trace_distance_matrices(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::GridMismatch);
    }
    Ok(0.5
        * hermitian_eigenvalues(&(a - b))?
            .iter()
            .map(|v| v.abs())
            .sum::<f64>())
}
