//! Scalar, vector and two-component spinor fields on a [`UniformGrid`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;

pub type C64 = Complex64;

fn check_finite_real(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidField("non-finite value".into()))
    }
}

fn check_finite_complex(values: &[C64]) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidField("non-finite value".into()))
    }
}

/// Real scalar field (potentials, densities, kernel tables).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        check_finite_real(&values)?;
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: UniformGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn constant(grid: UniformGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
            grid,
        }
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }
}

/// Real three-component field; components beyond the grid dimension still
/// exist (out-of-plane potentials and fields).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: UniformGrid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn new(grid: UniformGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::InvalidField(
                    "component length does not match grid".into(),
                ));
            }
            check_finite_real(c)?;
        }
        Ok(Self { grid, comps })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let v = f(grid.position(i));
            for c in 0..3 {
                out.comps[c][i] = v[c];
            }
        }
        out
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField::from_vec_unchecked(self.grid, self.comps[c].clone())
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn integral(&self) -> [f64; 3] {
        let dv = self.grid.cell_volume();
        [0, 1, 2].map(|c| self.comps[c].iter().sum::<f64>() * dv)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let comps = [0, 1, 2].map(|c| {
            self.comps[c]
                .iter()
                .zip(&other.comps[c])
                .map(|(a, b)| a - b)
                .collect()
        });
        Ok(Self {
            grid: self.grid,
            comps,
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let comps = [0, 1, 2].map(|c| {
            self.comps[c]
                .iter()
                .zip(&other.comps[c])
                .map(|(a, b)| a + b)
                .collect()
        });
        Ok(Self {
            grid: self.grid,
            comps,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let comps = [0, 1, 2].map(|c| self.comps[c].iter().map(|v| v * s).collect());
        Self {
            grid: self.grid,
            comps,
        }
    }
}

/// Two-component complex spinor `(psi_up, psi_down)` per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: UniformGrid,
    comps: [Vec<C64>; 2],
}

impl SpinorField {
    pub fn new(grid: UniformGrid, up: Vec<C64>, down: Vec<C64>) -> Result<Self> {
        if up.len() != grid.len() || down.len() != grid.len() {
            return Err(Error::InvalidField(
                "spinor component length does not match grid".into(),
            ));
        }
        check_finite_complex(&up)?;
        check_finite_complex(&down)?;
        Ok(Self {
            grid,
            comps: [up, down],
        })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            comps: [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]],
        }
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn([f64; 3]) -> [C64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let v = f(grid.position(i));
            out.comps[0][i] = v[0];
            out.comps[1][i] = v[1];
        }
        out
    }

    /// Spinor `chi * phi(x)` with a fixed spin vector `chi`.
    pub fn from_scalar(grid: UniformGrid, phi: &[C64], chi: [C64; 2]) -> Result<Self> {
        if phi.len() != grid.len() {
            return Err(Error::InvalidField(
                "orbital length does not match grid".into(),
            ));
        }
        let up = phi.iter().map(|v| chi[0] * v).collect();
        let down = phi.iter().map(|v| chi[1] * v).collect();
        Self::new(grid, up, down)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn component(&self, s: usize) -> &[C64] {
        &self.comps[s]
    }

    pub fn component_mut(&mut self, s: usize) -> &mut [C64] {
        &mut self.comps[s]
    }

    pub fn components_mut(&mut self) -> (&mut [C64], &mut [C64]) {
        let [a, b] = &mut self.comps;
        (a, b)
    }

    pub fn norm_sq(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        s * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `<self, other> = sum conj(self) other dV`.
    pub fn inner(&self, other: &SpinorField) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..2 {
            for (a, b) in self.comps[s].iter().zip(&other.comps[s]) {
                acc += a.conj() * b;
            }
        }
        Ok(acc * self.grid.cell_volume())
    }

    /// `|psi_up|^2 + |psi_down|^2` per point.
    pub fn density(&self) -> Vec<f64> {
        self.comps[0]
            .iter()
            .zip(&self.comps[1])
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    pub fn scale(&mut self, s: C64) {
        self.comps
            .iter_mut()
            .flat_map(|c| c.iter_mut())
            .for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: C64, other: &SpinorField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for s in 0..2 {
            for (x, y) in self.comps[s].iter_mut().zip(&other.comps[s]) {
                *x += a * y;
            }
        }
        Ok(())
    }

    pub fn sub(&self, other: &SpinorField) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        check_finite_complex(&self.comps[0]).is_ok() && check_finite_complex(&self.comps[1]).is_ok()
    }

    /// Spin density `conj(Psi) sigma_k Psi` for k = 1, 2, 3.
    pub fn spin_density(&self) -> [Vec<f64>; 3] {
        let n = self.grid.len();
        let mut s = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let (u, d) = (self.comps[0][i], self.comps[1][i]);
            let ud = u.conj() * d;
            s[0][i] = 2.0 * ud.re;
            s[1][i] = 2.0 * ud.im;
            s[2][i] = u.norm_sqr() - d.norm_sqr();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan() {
        let g = UniformGrid::cubic(1, 4, 1.0).unwrap();
        assert!(ScalarField::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        let bad = vec![C64::new(f64::INFINITY, 0.0); 4];
        assert!(SpinorField::new(g, bad, vec![C64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn density_is_sum_of_component_moduli() {
        let g = UniformGrid::cubic(1, 4, 1.0).unwrap();
        let psi = SpinorField::from_fn(g, |x| [C64::new(x[0], 1.0), C64::new(0.0, 2.0 * x[0])]);
        for (i, rho) in psi.density().iter().enumerate() {
            let x = g.coord(0, i);
            assert!((rho - (x * x + 1.0 + 4.0 * x * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn spin_density_of_x_polarized_state() {
        let g = UniformGrid::cubic(1, 4, 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = SpinorField::from_fn(g, |_| [C64::new(h, 0.0), C64::new(h, 0.0)]);
        let s = psi.spin_density();
        assert!((s[0][0] - 1.0).abs() < 1e-14 && s[1][0].abs() < 1e-14 && s[2][0].abs() < 1e-14);
    }
}
