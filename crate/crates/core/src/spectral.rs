//! Pseudo-spectral differential operators on periodic grids.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::field::{ScalarField, VectorField, C64};
use crate::grid::UniformGrid;

/// FFT plans and wavenumber tables for one grid.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: UniformGrid,
    fft: NdFft,
    k: [Vec<f64>; 3],
    kd: [Vec<f64>; 3],
}

impl Spectral {
    pub fn new(grid: &UniformGrid) -> Self {
        let shape = grid.shape();
        Self {
            grid: *grid,
            fft: NdFft::new(&shape),
            k: [0, 1, 2].map(|a| grid.wavenumbers(a)),
            kd: [0, 1, 2].map(|a| grid.derivative_wavenumbers(a)),
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn fft(&self) -> &NdFft {
        &self.fft
    }

    /// Full wavenumbers (Nyquist kept) of an axis.
    pub fn k(&self, axis: usize) -> &[f64] {
        &self.k[axis]
    }

    /// First-derivative wavenumbers (Nyquist zeroed) of an axis.
    pub fn kd(&self, axis: usize) -> &[f64] {
        &self.kd[axis]
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if !self.grid.is_periodic(axis) {
            return Err(Error::NonPeriodicAxis(axis));
        }
        Ok(())
    }

    fn check_all(&self) -> Result<()> {
        (0..self.grid.dim()).try_for_each(|a| self.check_axis(a))
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.fft.forward_all(data);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.fft.inverse_all(data);
    }

    /// `|k|^2` at a flat spectral index, full wavenumbers.
    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        let i = self.grid.unravel(idx);
        (0..3).map(|a| self.k[a][i[a]].powi(2)).sum()
    }

    /// `|k|^2` using derivative wavenumbers.
    #[inline]
    pub fn kd2(&self, idx: usize) -> f64 {
        let i = self.grid.unravel(idx);
        (0..3).map(|a| self.kd[a][i[a]].powi(2)).sum()
    }

    /// Spectral derivative along `axis`; zero for padded axes.
    pub fn derivative_complex(&self, f: &[C64], axis: usize) -> Result<Vec<C64>> {
        if axis >= self.grid.dim() {
            return Ok(vec![C64::new(0.0, 0.0); f.len()]);
        }
        self.check_axis(axis)?;
        let mut data = f.to_vec();
        self.fft.forward_axis(&mut data, axis);
        let shape = self.grid.shape();
        let stride: usize = shape[axis + 1..].iter().product();
        let n = shape[axis];
        for (idx, v) in data.iter_mut().enumerate() {
            let ia = (idx / stride) % n;
            *v *= Complex64::new(0.0, self.kd[axis][ia]);
        }
        self.fft.inverse_axis(&mut data, axis);
        Ok(data)
    }

    pub fn derivative_real(&self, f: &[f64], axis: usize) -> Result<Vec<f64>> {
        let c: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        Ok(self
            .derivative_complex(&c, axis)?
            .into_iter()
            .map(|v| v.re)
            .collect())
    }

    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        self.grid.ensure_same(f.grid())?;
        self.check_all()?;
        let comps = [
            self.derivative_real(f.values(), 0)?,
            self.derivative_real(f.values(), 1)?,
            self.derivative_real(f.values(), 2)?,
        ];
        VectorField::new(self.grid, comps)
    }

    /// Laplacian with the full `-|k|^2` symbol.
    pub fn laplacian_complex(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.check_all()?;
        let mut data = f.to_vec();
        self.fft.forward_all(&mut data);
        for (idx, v) in data.iter_mut().enumerate() {
            *v *= -self.k2(idx);
        }
        self.fft.inverse_all(&mut data);
        Ok(data)
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        self.grid.ensure_same(f.grid())?;
        let c: Vec<C64> = f.values().iter().map(|&v| C64::new(v, 0.0)).collect();
        let out = self
            .laplacian_complex(&c)?
            .into_iter()
            .map(|v| v.re)
            .collect();
        ScalarField::new(self.grid, out)
    }

    /// Curl of a periodic vector field; derivatives along padded axes vanish.
    pub fn curl(&self, v: &VectorField) -> Result<VectorField> {
        self.grid.ensure_same(v.grid())?;
        self.check_all()?;
        let d = |c: usize, a: usize| self.derivative_real(v.component(c), a);
        let (d1a2, d2a1) = (d(2, 1)?, d(1, 2)?);
        let (d2a0, d0a2) = (d(0, 2)?, d(2, 0)?);
        let (d0a1, d1a0) = (d(1, 0)?, d(0, 1)?);
        let sub =
            |a: Vec<f64>, b: Vec<f64>| a.into_iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        VectorField::new(
            self.grid,
            [sub(d1a2, d2a1), sub(d2a0, d0a2), sub(d0a1, d1a0)],
        )
    }

    pub fn divergence(&self, v: &VectorField) -> Result<ScalarField> {
        self.grid.ensure_same(v.grid())?;
        self.check_all()?;
        let mut out = vec![0.0; self.grid.len()];
        for a in 0..self.grid.dim() {
            let da = self.derivative_real(v.component(a), a)?;
            out.iter_mut().zip(da).for_each(|(o, x)| *o += x);
        }
        ScalarField::new(self.grid, out)
    }

    /// Transforms along one axis, multiplies by `factor(k_index, flat_index)`
    /// and transforms back. `flat_index` addresses the mixed representation:
    /// spectral along `axis`, physical along the others.
    pub fn mixed_axis_apply(
        &self,
        data: &mut [C64],
        axis: usize,
        factor: impl Fn(usize, usize) -> C64,
    ) {
        self.fft.forward_axis(data, axis);
        let shape = self.grid.shape();
        let stride: usize = shape[axis + 1..].iter().product();
        let n = shape[axis];
        for (idx, v) in data.iter_mut().enumerate() {
            let ia = (idx / stride) % n;
            *v *= factor(ia, idx);
        }
        self.fft.inverse_axis(data, axis);
    }
}

/// Convenience wrappers that build plans on the fly.
pub fn gradient(f: &ScalarField) -> Result<VectorField> {
    Spectral::new(f.grid()).gradient(f)
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    Spectral::new(f.grid()).laplacian(f)
}

pub fn curl(v: &VectorField) -> Result<VectorField> {
    Spectral::new(v.grid()).curl(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn gradient_of_sine() {
        let l = 3.0;
        let g = UniformGrid::cubic(1, 32, l).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / l).sin());
        let grad = gradient(&f).unwrap();
        for i in 0..g.len() {
            let x = g.coord(0, i);
            let expect = 2.0 * PI / l * (2.0 * PI * x / l).cos();
            assert!((grad.component(0)[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_plane_wave() {
        let g = UniformGrid::new(2, &[16, 32], &[2.0, 4.0]).unwrap();
        let (kx, ky) = (2.0 * PI * 3.0 / 2.0, 2.0 * PI * -5.0 / 4.0);
        let f: Vec<C64> = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                C64::from_polar(1.0, kx * x[0] + ky * x[1])
            })
            .collect();
        let lap = Spectral::new(&g).laplacian_complex(&f).unwrap();
        for (a, b) in lap.iter().zip(&f) {
            assert!((a + b * (kx * kx + ky * ky)).norm() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn non_periodic_axis_rejected() {
        let g = UniformGrid::cubic(2, 8, 1.0).unwrap().with_open_axis(1);
        let f = ScalarField::zeros(g);
        assert!(matches!(gradient(&f), Err(Error::NonPeriodicAxis(1))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn curl_of_gradient_vanishes(coeffs in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let g = UniformGrid::new(3, &[8, 8, 8], &[2.0, 3.0, 4.0]).unwrap();
            let f = ScalarField::from_fn(g, |x| {
                let mut s = 0.0;
                for m in 0..3 {
                    let k = [2.0 * PI / 2.0, 2.0 * PI / 3.0, 2.0 * PI / 4.0];
                    let ph = k[0] * (m as f64 + 1.0) * x[0] + k[1] * x[1] * (m as f64) + k[2] * x[2] * (2.0 - m as f64);
                    s += coeffs[4 * m] * ph.sin() + coeffs[4 * m + 1] * ph.cos()
                        + coeffs[4 * m + 2] * (k[1] * x[1]).cos() * coeffs[4 * m + 3];
                }
                s
            });
            let c = curl(&gradient(&f).unwrap()).unwrap();
            prop_assert!(c.max_abs() < 1e-12);
        }
    }
}
