//! Fixed family of smooth phase-space test functions used to measure weak
//! convergence through pairings `<F, phi>`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::PhaseSpaceField;
use crate::error::{Error, Result};
use crate::field::C64;
use crate::grid::UniformGrid;
use crate::state::MixedState;

const BASKET_V1: &str = include_str!("../../data/basket_v1.json");

/// `prod_a He_{n_a}((x_a - c_a)/w_a) e^{-(x_a - c_a)^2/(2 w_a^2)}` times the
/// same form in `xi`, over the active axes. Position offsets are folded onto
/// the periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub name: String,
    pub x_center: [f64; 3],
    pub x_width: [f64; 3],
    pub x_order: [u32; 3],
    pub xi_center: [f64; 3],
    pub xi_width: [f64; 3],
    pub xi_order: [u32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Basket {
    pub version: String,
    pub functions: Vec<TestFunction>,
}

/// Probabilists' Hermite polynomial `He_n(t)`.
pub fn hermite_he(n: u32, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, t);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = t * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn fold(d: f64, l: f64) -> f64 {
    d - l * (d / l + 0.5).floor()
}

fn profile(n: u32, c: f64, w: f64, x: f64) -> f64 {
    let t = (x - c) / w;
    hermite_he(n, t) * (-0.5 * t * t).exp()
}

impl TestFunction {
    /// Position factor on axis `a` at `x` in a box of length `l`.
    pub fn x_factor(&self, a: usize, x: f64, l: f64) -> f64 {
        let t = fold(x - self.x_center[a], l) / self.x_width[a];
        hermite_he(self.x_order[a], t) * (-0.5 * t * t).exp()
    }

    pub fn xi_factor(&self, a: usize, xi: f64) -> f64 {
        profile(self.xi_order[a], self.xi_center[a], self.xi_width[a], xi)
    }

    /// `phi(x, xi)` on `dim` active axes of a box with extents `ext`.
    pub fn eval(&self, dim: usize, ext: [f64; 3], x: [f64; 3], xi: [f64; 3]) -> f64 {
        (0..dim)
            .map(|a| self.x_factor(a, x[a], ext[a]) * self.xi_factor(a, xi[a]))
            .product()
    }

    /// `int phi_xi(xi) e^{-i xi y} dxi` on axis `a`:
    /// `w sqrt(2 pi) e^{-i c y} (-i w y)^n e^{-w^2 y^2 / 2}`.
    pub fn xi_factor_transform(&self, a: usize, y: f64) -> C64 {
        let (c, w, n) = (self.xi_center[a], self.xi_width[a], self.xi_order[a]);
        let pow = C64::new(0.0, -w * y).powu(n);
        C64::from_polar(
            w * (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * w * w * y * y).exp(),
            -c * y,
        ) * pow
    }

    fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.x_width[a] > 0.0 && self.xi_width[a] > 0.0) {
                return Err(Error::Config(format!(
                    "test function {}: widths must be positive",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

impl Basket {
    /// The shipped twelve-function basket.
    pub fn v1() -> Self {
        Self::from_json(BASKET_V1).expect("shipped basket parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: Basket = serde_json::from_str(text)?;
        for f in &b.functions {
            f.validate()?;
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Applies the matrix `m` (row-major, `n x n`) along `axis` of a row-major array.
fn apply_along_axis(shape: [usize; 3], data: &mut [C64], axis: usize, m: &[C64]) {
    let n = shape[axis];
    if n == 1 {
        for v in data.iter_mut() {
            *v *= m[0];
        }
        return;
    }
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![C64::new(0.0, 0.0); n];
    let mut out = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[base + i * stride];
            }
            for (i, ov) in out.iter_mut().enumerate() {
                let row = &m[i * n..(i + 1) * n];
                *ov = row.iter().zip(&line).map(|(a, b)| a * b).sum();
            }
            for (i, v) in out.iter().enumerate() {
                data[base + i * stride] = *v;
            }
        }
    }
}

/// Kernel matrix `K_a(u, v) = phi_x((u + v)/2) check(phi_xi)((u - v)/hbar)` on one axis,
/// with `u - v` taken as the minimal periodic image.
fn axis_kernel(grid: &UniformGrid, a: usize, phi: &TestFunction, hbar: f64) -> Vec<C64> {
    let n = grid.points(a);
    if a >= grid.dim() {
        return vec![C64::new(1.0, 0.0)];
    }
    let l = grid.extent(a);
    let xs = grid.axis_coords(a);
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let d = fold(xs[i] - xs[j], l);
            let mid = xs[j] + 0.5 * d;
            m[i * n + j] = phi.xi_factor_transform(a, d / hbar) * phi.x_factor(a, mid, l);
        }
    }
    m
}

/// `<Tr F, phi>` for the Wigner matrix of `state`, evaluated from the orbitals as
/// `(2 pi hbar)^-d sum_j lambda_j int int K(u, v) Psi_j(u) . conj(Psi_j(v)) du dv`.
pub fn pair_state(state: &MixedState, phi: &TestFunction) -> f64 {
    let grid = *state.grid();
    let hbar = state.hbar();
    let d = grid.dim();
    let kernels: Vec<Vec<C64>> = (0..3).map(|a| axis_kernel(&grid, a, phi, hbar)).collect();
    let dv = grid.cell_volume();
    let pref = (2.0 * std::f64::consts::PI * hbar).powi(-(d as i32)) * dv * dv;
    let parts: Vec<f64> = state
        .orbitals()
        .par_iter()
        .map(|p| {
            let mut total = 0.0;
            for s in 0..2 {
                let psi = p.component(s);
                let mut w: Vec<C64> = psi.iter().map(|v| v.conj()).collect();
                for a in 0..d {
                    apply_along_axis(grid.shape(), &mut w, a, &kernels[a]);
                }
                total += psi.iter().zip(&w).map(|(a, b)| a * b).sum::<C64>().re;
            }
            total
        })
        .collect();
    parts
        .iter()
        .zip(state.weights())
        .map(|(p, w)| p * w)
        .sum::<f64>()
        * pref
}

pub fn pair_state_all(state: &MixedState, basket: &Basket) -> Vec<f64> {
    basket
        .functions
        .iter()
        .map(|f| pair_state(state, f))
        .collect()
}

/// Quadrature `sum f phi dx dxi` over a sampled phase-space field.
pub fn pair_field(f: &PhaseSpaceField, phi: &TestFunction) -> f64 {
    let g = f.grid();
    let nxi = g.xi_len();
    let ext = g.x().extents();
    let d = g.dim();
    f.values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * phi.eval(d, ext, g.x().position(i / nxi), g.xi_at(i % nxi)))
        .sum::<f64>()
        * g.cell_volume()
}
