//! Mixed states: weighted orthonormal families of spinor orbitals.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, C64};
use crate::grid::UniformGrid;

/// Tolerance on the sum of occupation weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance on each orbital norm.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on pairwise orbital overlaps at construction.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    orbitals: Vec<SpinorField>,
    weights: Vec<f64>,
    hbar: f64,
}

impl MixedState {
    /// Validates weights, normalization and orthogonality.
    pub fn new(orbitals: Vec<SpinorField>, weights: Vec<f64>, hbar: f64) -> Result<Self> {
        if orbitals.is_empty() {
            return Err(Error::InvalidState("no orbitals".into()));
        }
        if orbitals.len() != weights.len() {
            return Err(Error::InvalidState(format!(
                "{} orbitals but {} weights",
                orbitals.len(),
                weights.len()
            )));
        }
        if !(hbar > 0.0 && hbar <= 1.0) {
            return Err(Error::InvalidState(format!("hbar = {hbar} outside (0, 1]")));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidState("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidState(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let grid = *orbitals[0].grid();
        for (j, psi) in orbitals.iter().enumerate() {
            grid.ensure_same(psi.grid())?;
            if !psi.is_finite() {
                return Err(Error::InvalidState(format!(
                    "orbital {j} has non-finite values"
                )));
            }
            let n = psi.norm();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidState(format!("orbital {j} has norm {n}")));
            }
        }
        for j in 0..orbitals.len() {
            for k in 0..j {
                let ov = orbitals[k].inner(&orbitals[j])?.norm();
                if ov > ORTHOGONALITY_TOL {
                    return Err(Error::InvalidState(format!(
                        "orbitals {k} and {j} overlap by {ov:e}"
                    )));
                }
            }
        }
        Ok(Self {
            orbitals,
            weights,
            hbar,
        })
    }

    pub fn pure(psi: SpinorField, hbar: f64) -> Result<Self> {
        Self::new(vec![psi], vec![1.0], hbar)
    }

    /// Like [`MixedState::new`] but additionally enforces the weight
    /// condition `hbar^-d sum lambda_j^2 <= bound`.
    pub fn hbar_scaled(
        orbitals: Vec<SpinorField>,
        weights: Vec<f64>,
        hbar: f64,
        bound: f64,
    ) -> Result<Self> {
        let s = Self::new(orbitals, weights, hbar)?;
        let v = s.weight_condition();
        if v > bound {
            return Err(Error::InvalidState(format!(
                "weight condition {v} exceeds the configured bound {bound}"
            )));
        }
        Ok(s)
    }

    /// Replaces orbitals after propagation; weights and hbar are kept.
    pub(crate) fn replace_orbitals(&mut self, orbitals: Vec<SpinorField>) {
        debug_assert_eq!(orbitals.len(), self.weights.len());
        self.orbitals = orbitals;
    }

    pub fn grid(&self) -> &UniformGrid {
        self.orbitals[0].grid()
    }

    pub fn orbitals(&self) -> &[SpinorField] {
        &self.orbitals
    }

    pub(crate) fn orbitals_mut(&mut self) -> &mut [SpinorField] {
        &mut self.orbitals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    /// `hbar^-d sum_j lambda_j^2`.
    pub fn weight_condition(&self) -> f64 {
        let d = self.grid().dim() as i32;
        self.weights.iter().map(|w| w * w).sum::<f64>() * self.hbar.powi(-d)
    }

    /// Weighted sum of orbital norms squared.
    pub fn mass(&self) -> f64 {
        self.orbitals
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * p.norm_sq())
            .sum()
    }

    /// Largest deviation of an orbital norm from one.
    pub fn max_norm_error(&self) -> f64 {
        self.orbitals
            .iter()
            .fold(0.0, |m, p| m.max((p.norm() - 1.0).abs()))
    }

    /// Spin expectation `<Psi_j, sigma Psi_j>` per orbital.
    pub fn spin_expectations(&self) -> Vec<[f64; 3]> {
        self.orbitals
            .iter()
            .map(|p| {
                let dv = p.grid().cell_volume();
                p.spin_density().map(|s| s.iter().sum::<f64>() * dv)
            })
            .collect()
    }

    /// Density operator kernel `R(x_a, x_b)` component `(s, t)`:
    /// `sum_j lambda_j psi_{j,s}(x_a) conj(psi_{j,t}(x_b))`.
    pub fn kernel(&self, s: usize, t: usize, a: usize, b: usize) -> C64 {
        self.orbitals
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| p.component(s)[a] * p.component(t)[b].conj() * w)
            .sum()
    }
}

/// `rho(x) = sum_j lambda_j |Psi_j(x)|^2`.
pub fn density(state: &MixedState) -> ScalarField {
    density_of(state.orbitals(), state.weights())
}

/// Weighted density of an orbital family, summed in orbital order.
pub(crate) fn density_of(orbitals: &[SpinorField], weights: &[f64]) -> ScalarField {
    let grid = *orbitals[0].grid();
    let mut rho = vec![0.0; grid.len()];
    for (psi, &w) in orbitals.iter().zip(weights) {
        let (u, d) = (psi.component(0), psi.component(1));
        for i in 0..rho.len() {
            rho[i] += w * (u[i].norm_sqr() + d[i].norm_sqr());
        }
    }
    ScalarField::from_vec_unchecked(grid, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: UniformGrid, x0: f64, k: f64, spin: [C64; 2]) -> SpinorField {
        let phi: Vec<C64> = (0..grid.len())
            .map(|i| {
                let x = grid.coord(0, i);
                C64::from_polar((-(x - x0).powi(2)).exp(), k * x)
            })
            .collect();
        let mut psi = SpinorField::from_scalar(grid, &phi, spin).unwrap();
        let n = psi.norm();
        psi.scale(C64::new(1.0 / n, 0.0));
        psi
    }

    #[test]
    fn validation() {
        let g = UniformGrid::cubic(1, 64, 16.0).unwrap();
        let up = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let dn = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let a = gaussian(g, 0.0, 0.0, up);
        let b = gaussian(g, 0.0, 0.0, dn);
        assert!(MixedState::new(vec![a.clone(), b.clone()], vec![0.5, 0.5], 1.0).is_ok());
        assert!(MixedState::new(vec![a.clone(), a.clone()], vec![0.5, 0.5], 1.0).is_err());
        assert!(MixedState::new(vec![a.clone(), b.clone()], vec![0.5, 0.6], 1.0).is_err());
        assert!(MixedState::new(vec![a.scaled(C64::new(2.0, 0.0))], vec![1.0], 1.0).is_err());
        assert!(MixedState::new(vec![a], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn density_of_equal_mixture_is_average() {
        let g = UniformGrid::cubic(1, 64, 16.0).unwrap();
        let up = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let dn = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let a = gaussian(g, -1.0, 0.0, up);
        let b = gaussian(g, 2.0, 1.0, dn);
        let s = MixedState::new(vec![a.clone(), b.clone()], vec![0.5, 0.5], 1.0).unwrap();
        let rho = density(&s);
        for i in 0..g.len() {
            let expect = 0.5 * (a.density()[i] + b.density()[i]);
            assert!((rho.values()[i] - expect).abs() < 1e-15);
        }
        assert!((rho.integral() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weight_condition_for_equal_weights() {
        // hbar = 1/4 in 1d, M = 4 equal weights: hbar^-1 * 4 * (1/4)^2 = 1.
        let g = UniformGrid::cubic(1, 64, 16.0).unwrap();
        let orbitals: Vec<SpinorField> = (0..4)
            .map(|m| {
                let phi: Vec<C64> = (0..g.len())
                    .map(|i| {
                        C64::from_polar(
                            1.0 / 16f64.sqrt(),
                            2.0 * std::f64::consts::PI * m as f64 * g.coord(0, i) / 16.0,
                        )
                    })
                    .collect();
                SpinorField::from_scalar(g, &phi, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap()
            })
            .collect();
        let s = MixedState::hbar_scaled(orbitals, vec![0.25; 4], 0.25, 1.0).unwrap();
        let direct: f64 = 4.0 * 0.25f64.powi(2) / 0.25;
        assert!((s.weight_condition() - direct).abs() < 1e-15);
        assert!((density(&s).integral() - 1.0).abs() < 1e-10);
    }
}
