//! External electromagnetic data: vector potential, magnetic field and
//! scalar potential.
//!
//! The vector potential is stored as a linear part `A_i = sum_j G_ij x_j`
//! (evaluated on unwrapped coordinates, so that uniform fields such as the
//! Landau gauge fit on a periodic box) plus a periodic tabulated part.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::UniformGrid;
use crate::spectral::Spectral;

const COMPAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    grid: UniformGrid,
    linear: [[f64; 3]; 3],
    periodic: VectorField,
    v_ext: ScalarField,
    b: VectorField,
    splitting_compatible: bool,
}

impl GaugeField {
    pub fn new(
        grid: UniformGrid,
        linear: [[f64; 3]; 3],
        periodic: VectorField,
        v_ext: ScalarField,
    ) -> Result<Self> {
        grid.ensure_same(periodic.grid())?;
        grid.ensure_same(v_ext.grid())?;
        if linear.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField(
                "non-finite linear gauge coefficient".into(),
            ));
        }
        for (i, row) in linear.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if j >= grid.dim() && g != 0.0 {
                    return Err(Error::InvalidField(format!(
                        "linear gauge coefficient ({i},{j}) refers to an absent axis"
                    )));
                }
            }
        }
        if grid.dim() == 1 && (linear.iter().flatten().any(|&v| v != 0.0) || !periodic.is_zero()) {
            return Err(Error::InvalidField(
                "magnetic potentials are not supported in one dimension".into(),
            ));
        }
        let mut out = Self {
            grid,
            linear,
            periodic,
            v_ext,
            b: VectorField::zeros(grid),
            splitting_compatible: true,
        };
        out.refresh()?;
        Ok(out)
    }

    pub fn zero(grid: UniformGrid) -> Self {
        Self {
            grid,
            linear: [[0.0; 3]; 3],
            periodic: VectorField::zeros(grid),
            v_ext: ScalarField::zeros(grid),
            b: VectorField::zeros(grid),
            splitting_compatible: true,
        }
    }

    /// Uniform `B = (0, 0, b0)` with `A = (-b0 y, 0, 0)`.
    pub fn uniform_b_landau(grid: UniformGrid, b0: f64) -> Result<Self> {
        if grid.dim() < 2 {
            return Err(Error::InvalidField(
                "a uniform out-of-plane field needs at least two dimensions".into(),
            ));
        }
        let mut linear = [[0.0; 3]; 3];
        linear[0][1] = -b0;
        Self::new(
            grid,
            linear,
            VectorField::zeros(grid),
            ScalarField::zeros(grid),
        )
    }

    /// Uniform `B = (0, 0, b0)` with `A = (b0/2)(-y, x, 0)`.
    pub fn uniform_b_symmetric(grid: UniformGrid, b0: f64) -> Result<Self> {
        if grid.dim() < 2 {
            return Err(Error::InvalidField(
                "a uniform out-of-plane field needs at least two dimensions".into(),
            ));
        }
        let mut linear = [[0.0; 3]; 3];
        linear[0][1] = -0.5 * b0;
        linear[1][0] = 0.5 * b0;
        Self::new(
            grid,
            linear,
            VectorField::zeros(grid),
            ScalarField::zeros(grid),
        )
    }

    /// Tabulated periodic potential.
    pub fn from_table(a: VectorField, v_ext: ScalarField) -> Result<Self> {
        Self::new(*a.grid(), [[0.0; 3]; 3], a, v_ext)
    }

    pub fn with_v_ext(mut self, v_ext: ScalarField) -> Result<Self> {
        self.grid.ensure_same(v_ext.grid())?;
        self.v_ext = v_ext;
        Ok(self)
    }

    /// Replaces the periodic part of `A`, recomputing `B`.
    pub fn with_periodic(&self, periodic: VectorField) -> Result<Self> {
        Self::new(self.grid, self.linear, periodic, self.v_ext.clone())
    }

    fn refresh(&mut self) -> Result<()> {
        let g = &self.linear;
        let b_lin = [g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]];
        let mut b = if self.periodic.is_zero() {
            VectorField::zeros(self.grid)
        } else {
            Spectral::new(&self.grid).curl(&self.periodic)?
        };
        for c in 0..3 {
            b.component_mut(c).iter_mut().for_each(|v| *v += b_lin[c]);
        }
        self.b = b;
        self.splitting_compatible = self.check_splitting();
        Ok(())
    }

    fn check_splitting(&self) -> bool {
        let dim = self.grid.dim();
        if (0..dim).any(|j| self.linear[j][j] != 0.0) {
            return false;
        }
        let shape = self.grid.shape();
        let scale = 1.0 + self.periodic.max_abs();
        for j in 0..dim {
            let comp = self.periodic.component(j);
            let stride: usize = shape[j + 1..].iter().product();
            let n = shape[j];
            for (idx, &v) in comp.iter().enumerate() {
                let ij = (idx / stride) % n;
                let base = idx - ij * stride;
                if (v - comp[base]).abs() > COMPAT_TOL * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn linear(&self) -> &[[f64; 3]; 3] {
        &self.linear
    }

    pub fn periodic(&self) -> &VectorField {
        &self.periodic
    }

    pub fn v_ext(&self) -> &ScalarField {
        &self.v_ext
    }

    pub fn b(&self) -> &VectorField {
        &self.b
    }

    /// True when each `A_j` is independent of `x_j` along the resolved axes.
    pub fn is_splitting_compatible(&self) -> bool {
        self.splitting_compatible
    }

    pub fn has_vector_potential(&self) -> bool {
        self.linear.iter().flatten().any(|&v| v != 0.0) || !self.periodic.is_zero()
    }

    pub fn has_magnetic_field(&self) -> bool {
        !self.b.is_zero()
    }

    #[inline]
    fn linear_at(&self, x: [f64; 3]) -> [f64; 3] {
        let g = &self.linear;
        [0, 1, 2].map(|i| g[i][0] * x[0] + g[i][1] * x[1] + g[i][2] * x[2])
    }

    /// Total vector potential at grid point `idx`.
    #[inline]
    pub fn a_at(&self, idx: usize) -> [f64; 3] {
        let l = self.linear_at(self.grid.position(idx));
        let p = self.periodic.at(idx);
        [l[0] + p[0], l[1] + p[1], l[2] + p[2]]
    }

    /// Total vector potential at grid point `i + shift`: the linear part is
    /// evaluated at the unwrapped position, the periodic part wraps.
    pub fn a_shifted(&self, i: [usize; 3], shift: [isize; 3]) -> [f64; 3] {
        let h = [0, 1, 2].map(|a| self.grid.spacing(a));
        let mut x = [0.0; 3];
        for a in 0..self.grid.dim() {
            x[a] = self.grid.coord(a, i[a]) + shift[a] as f64 * h[a];
        }
        let l = self.linear_at(x);
        let p = self.periodic.at(self.grid.shifted(i, shift));
        [l[0] + p[0], l[1] + p[1], l[2] + p[2]]
    }

    pub fn a_total(&self) -> VectorField {
        VectorField::from_fn(self.grid, |x| self.linear_at(x))
            .add(&self.periodic)
            .expect("same grid")
    }

    pub fn max_abs_a(&self) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, i| {
            self.a_at(i).iter().fold(m, |m, v| m.max(v.abs()))
        })
    }

    pub fn max_abs_b(&self) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, i| {
            let b = self.b.at(i);
            m.max((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt())
        })
    }

    /// `div A` on the resolved axes.
    pub fn divergence(&self) -> Result<ScalarField> {
        let trace: f64 = (0..self.grid.dim()).map(|j| self.linear[j][j]).sum();
        let mut d = if self.periodic.is_zero() {
            ScalarField::zeros(self.grid)
        } else {
            Spectral::new(&self.grid).divergence(&self.periodic)?
        };
        d.values_mut().iter_mut().for_each(|v| *v += trace);
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn landau_gauge_has_uniform_field() {
        let g = UniformGrid::cubic(2, 16, 4.0).unwrap();
        let gf = GaugeField::uniform_b_landau(g, 1.5).unwrap();
        assert!(gf.is_splitting_compatible());
        for i in 0..g.len() {
            assert_eq!(gf.b().at(i), [0.0, 0.0, 1.5]);
            let y = g.position(i)[1];
            assert!((gf.a_at(i)[0] + 1.5 * y).abs() < 1e-15);
        }
        assert!(gf.divergence().unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn zero_preset() {
        let g = UniformGrid::cubic(3, 8, 1.0).unwrap();
        let gf = GaugeField::zero(g);
        assert!(!gf.has_vector_potential() && !gf.has_magnetic_field());
        assert!(gf.is_splitting_compatible());
    }

    #[test]
    fn incompatible_table_detected() {
        let g = UniformGrid::cubic(2, 16, 2.0).unwrap();
        let a = VectorField::from_fn(g, |x| [(PI * x[0]).sin(), 0.0, 0.0]);
        let gf = GaugeField::from_table(a, ScalarField::zeros(g)).unwrap();
        assert!(!gf.is_splitting_compatible());
        let a = VectorField::from_fn(g, |x| [(PI * x[1]).sin(), (PI * x[0]).cos(), 0.0]);
        let gf = GaugeField::from_table(a, ScalarField::zeros(g)).unwrap();
        assert!(gf.is_splitting_compatible());
    }

    #[test]
    fn periodic_table_curl() {
        let l = 2.0;
        let k = 2.0 * PI / l;
        let g = UniformGrid::cubic(2, 16, l).unwrap();
        let a = VectorField::from_fn(g, |x| [(k * x[1]).sin(), 0.0, 0.0]);
        let gf = GaugeField::from_table(a, ScalarField::zeros(g)).unwrap();
        for i in 0..g.len() {
            let y = g.position(i)[1];
            assert!((gf.b().at(i)[2] + k * (k * y).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_magnetic_rejected() {
        let g = UniformGrid::cubic(1, 16, 2.0).unwrap();
        let a = VectorField::from_fn(g, |_| [0.0, 1.0, 0.0]);
        assert!(GaugeField::from_table(a, ScalarField::zeros(g)).is_err());
    }

    #[test]
    fn shifted_evaluation_unwraps_linear_part() {
        let g = UniformGrid::cubic(2, 8, 4.0).unwrap();
        let gf = GaugeField::uniform_b_landau(g, 1.0).unwrap();
        let a = gf.a_shifted([0, 7, 0], [0, 3, 0]);
        let y = g.coord(1, 7) + 3.0 * g.spacing(1);
        assert!((a[0] + y).abs() < 1e-15);
    }
}
