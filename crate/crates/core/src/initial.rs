//! Initial data: Gaussian wave packets, Hermite functions and
//! Gaussian-Wigner mixed states built from thermal Hermite ensembles.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpinorField, C64};
use crate::grid::UniformGrid;
use crate::state::MixedState;

pub const SPIN_UP: [C64; 2] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
pub const SPIN_DOWN: [C64; 2] = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

/// Position-space displacement from `x0` on a periodic axis, folded into
/// `[-L/2, L/2)`.
fn fold(x: f64, x0: f64, l: f64) -> f64 {
    let d = x - x0;
    d - l * (d / l + 0.5).floor()
}

/// Gaussian packet `exp(-|x-x0|^2 / (4 s^2) + i p0.x / hbar) chi`, with `s`
/// the standard deviation of the density along each axis, normalized on the
/// grid.
pub fn gaussian_packet(
    grid: &UniformGrid,
    center: [f64; 3],
    momentum: [f64; 3],
    width: [f64; 3],
    hbar: f64,
    spin: [C64; 2],
) -> Result<SpinorField> {
    let d = grid.dim();
    if (0..d).any(|a| !(width[a] > 0.0)) || !(hbar > 0.0) {
        return Err(Error::InvalidState(
            "widths and hbar must be positive".into(),
        ));
    }
    let ext = grid.extents();
    let phi: Vec<C64> = (0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            let mut e = 0.0;
            let mut ph = 0.0;
            for a in 0..d {
                let dx = fold(x[a], center[a], ext[a]);
                e -= dx * dx / (4.0 * width[a] * width[a]);
                ph += momentum[a] * (center[a] + dx) / hbar;
            }
            C64::from_polar(e.exp(), ph)
        })
        .collect();
    normalized(grid, &phi, spin)
}

fn normalized(grid: &UniformGrid, phi: &[C64], spin: [C64; 2]) -> Result<SpinorField> {
    let mut psi = SpinorField::from_scalar(*grid, phi, spin)?;
    let n = psi.norm();
    if !(n > 0.0) {
        return Err(Error::InvalidState("orbital vanishes on the grid".into()));
    }
    psi.scale(C64::new(1.0 / n, 0.0));
    Ok(psi)
}

/// Normalized Hermite functions `h_0(x) .. h_{n_max}(x)` with
/// `h_n = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2)`.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n_max + 1);
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    h.push(h0);
    if n_max >= 1 {
        h.push(std::f64::consts::SQRT_2 * x * h0);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let v = (2.0 / nf).sqrt() * x * h[n - 1] - ((nf - 1.0) / nf).sqrt() * h[n - 2];
        h.push(v);
    }
    h
}

/// Gaussian phase-space datum `f(x, p)` with independent normal marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDatum {
    pub center: [f64; 3],
    pub momentum: [f64; 3],
    pub sigma_x: [f64; 3],
    pub sigma_p: [f64; 3],
}

impl GaussianDatum {
    /// Normalized density at `(x, p)` in `dim` dimensions (positions folded
    /// onto the periodic box of extents `ext`).
    pub fn eval(&self, dim: usize, ext: [f64; 3], x: [f64; 3], p: [f64; 3]) -> f64 {
        let mut v = 1.0;
        for a in 0..dim {
            let dx = fold(x[a], self.center[a], ext[a]);
            let dp = p[a] - self.momentum[a];
            let (sx, sp) = (self.sigma_x[a], self.sigma_p[a]);
            v *= (-0.5 * dx * dx / (sx * sx) - 0.5 * dp * dp / (sp * sp)).exp()
                / (2.0 * std::f64::consts::PI * sx * sp);
        }
        v
    }
}

/// Per-axis parameters of the thermal Hermite ensemble whose Wigner
/// function is a Gaussian with position and momentum spreads
/// `S_x^2 = s_x^2 + hbar s_x / (2 s_p)` and `S_p^2 = s_p^2 + hbar s_p / (2 s_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalAxis {
    pub length: f64,
    pub ratio: f64,
}

impl ThermalAxis {
    pub fn new(sigma_x: f64, sigma_p: f64, hbar: f64) -> Self {
        let sx2 = sigma_x * sigma_x + hbar * sigma_x / (2.0 * sigma_p);
        let sp2 = sigma_p * sigma_p + hbar * sigma_p / (2.0 * sigma_x);
        let (sx, sp) = (sx2.sqrt(), sp2.sqrt());
        Self {
            length: (hbar * sx / sp).sqrt(),
            ratio: (2.0 * sx * sp / hbar - 1.0) / (2.0 * sx * sp / hbar + 1.0),
        }
    }

    /// Spreads `(S_x, S_p)` of the resulting Wigner function.
    pub fn spreads(&self, hbar: f64) -> (f64, f64) {
        let r = (1.0 + self.ratio) / (1.0 - self.ratio);
        let sx = self.length * (0.5 * r).sqrt();
        let sp = hbar / self.length * (0.5 * r).sqrt();
        (sx, sp)
    }
}

/// Mixed state with weights `prod_a (1 - q_a) q_a^{n_a}` and orbitals
/// `prod_a l_a^{-1/2} h_{n_a}((x_a - x0_a)/l_a) exp(i p0.x/hbar)`.
///
/// Index tuples are kept while their weight exceeds `cutoff` times the
/// largest weight; the kept weights are renormalized and the sampled
/// orbitals are re-orthonormalized on the grid (modified Gram-Schmidt).
pub fn thermal_mixed_state(
    grid: &UniformGrid,
    datum: &GaussianDatum,
    hbar: f64,
    spin: [C64; 2],
    cutoff: f64,
    max_orbitals: usize,
) -> Result<MixedState> {
    let d = grid.dim();
    let axes: Vec<ThermalAxis> = (0..d)
        .map(|a| ThermalAxis::new(datum.sigma_x[a], datum.sigma_p[a], hbar))
        .collect();
    let log_cut = cutoff.ln();
    let mut tuples: Vec<([usize; 3], f64)> = Vec::new();
    let n_axis: Vec<usize> = axes
        .iter()
        .map(|ax| {
            if ax.ratio <= 0.0 {
                0
            } else {
                (log_cut / ax.ratio.ln()).floor().max(0.0) as usize
            }
        })
        .collect();
    let mut idx = [0usize; 3];
    loop {
        let mut lw = 0.0;
        for a in 0..d {
            if axes[a].ratio > 0.0 {
                lw += idx[a] as f64 * axes[a].ratio.ln();
            }
        }
        if lw >= log_cut {
            let w: f64 = (0..d)
                .map(|a| (1.0 - axes[a].ratio) * axes[a].ratio.powi(idx[a] as i32))
                .product();
            tuples.push((idx, w));
        }
        let mut a = 0;
        loop {
            if a == d {
                break;
            }
            idx[a] += 1;
            if idx[a] <= n_axis[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == d {
            break;
        }
    }
    tuples.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    if tuples.len() > max_orbitals {
        return Err(Error::Budget {
            requested: tuples.len() as u128,
            budget: max_orbitals as u128,
        });
    }
    let ext = grid.extents();
    let tables: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|a| {
            (0..grid.points(a))
                .map(|i| {
                    let dx = fold(grid.coord(a, i), datum.center[a], ext[a]);
                    let l = axes[a].length;
                    hermite_functions(n_axis[a], dx / l)
                        .into_iter()
                        .map(|v| v / l.sqrt())
                        .collect()
                })
                .collect()
        })
        .collect();
    let phase: Vec<C64> = (0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            let ph: f64 = (0..d)
                .map(|a| {
                    datum.momentum[a] * (datum.center[a] + fold(x[a], datum.center[a], ext[a]))
                })
                .sum();
            C64::from_polar(1.0, ph / hbar)
        })
        .collect();
    let dv = grid.cell_volume();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(tuples.len());
    for (t, _) in &tuples {
        let mut phi: Vec<C64> = (0..grid.len())
            .map(|i| {
                let ii = grid.unravel(i);
                let amp: f64 = (0..d).map(|a| tables[a][ii[a]][t[a]]).product();
                phase[i] * amp
            })
            .collect();
        for _ in 0..2 {
            for b in &basis {
                let ov: C64 = b.iter().zip(&phi).map(|(u, v)| u.conj() * v).sum::<C64>() * dv;
                phi.iter_mut().zip(b).for_each(|(v, u)| *v -= ov * u);
            }
        }
        let n = (phi.iter().map(|v| v.norm_sqr()).sum::<f64>() * dv).sqrt();
        if !(n > 0.5) {
            return Err(Error::InvalidState(format!(
                "Hermite orbital {t:?} is not resolved by the grid (residual norm {n})"
            )));
        }
        phi.iter_mut().for_each(|v| *v /= n);
        basis.push(phi);
    }
    let total: f64 = tuples.iter().map(|t| t.1).sum();
    let weights: Vec<f64> = tuples.iter().map(|t| t.1 / total).collect();
    let orbitals = basis
        .iter()
        .map(|phi| SpinorField::from_scalar(*grid, phi, spin))
        .collect::<Result<Vec<_>>>()?;
    let weights = renormalize(weights);
    MixedState::new(orbitals, weights, hbar)
}

/// Node count and seed for [`coherent_mixture`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherentNodes {
    /// Nodes per `hbar^-d`.
    pub oversample: usize,
    pub max_nodes: usize,
    pub seed: u64,
}

impl Default for CoherentNodes {
    fn default() -> Self {
        Self {
            oversample: 1,
            max_nodes: 4096,
            seed: 0,
        }
    }
}

impl CoherentNodes {
    /// `M = oversample * floor(hbar^-d)`, at least `2d + 1` so that the node
    /// covariance can be whitened.
    pub fn count(&self, dim: usize, hbar: f64) -> Result<usize> {
        let base = (hbar.powi(-(dim as i32)) * (1.0 + 1e-12)).floor().max(1.0) as usize;
        let m = (base * self.oversample.max(1)).max(2 * dim + 1);
        if m > self.max_nodes {
            return Err(Error::Budget {
                requested: m as u128,
                budget: self.max_nodes as u128,
            });
        }
        Ok(m)
    }
}

/// Coherent-state width per axis whose Wigner function has the aspect ratio
/// of the datum: `s^2 = hbar sigma_x / (2 sigma_p)`.
pub fn coherent_width(datum: &GaussianDatum, a: usize, hbar: f64) -> f64 {
    (0.5 * hbar * datum.sigma_x[a] / datum.sigma_p[a]).sqrt()
}

/// Phase-space nodes `(x_j, p_j)` with sample mean and covariance equal to
/// the datum's minus the coherent-state covariance.
pub fn coherent_nodes(
    datum: &GaussianDatum,
    dim: usize,
    hbar: f64,
    nodes: &CoherentNodes,
) -> Result<Vec<[f64; 6]>> {
    let m = nodes.count(dim, hbar)?;
    let k = 2 * dim;
    let mut spread = [0.0; 6];
    for a in 0..dim {
        let s = coherent_width(datum, a, hbar);
        let vx = datum.sigma_x[a].powi(2) - s * s;
        let vp = datum.sigma_p[a].powi(2) - 0.25 * hbar * hbar / (s * s);
        if !(vx > 0.0 && vp > 0.0) {
            return Err(Error::InvalidState(format!(
                "hbar = {hbar} exceeds 2 sigma_x sigma_p on axis {a}; coherent states are wider than the datum"
            )));
        }
        spread[a] = vx.sqrt();
        spread[dim + a] = vp.sqrt();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(nodes.seed);
    let mut z = DMatrix::<f64>::from_fn(m, k, |_, _| StandardNormal.sample(&mut rng));
    for c in 0..k {
        let mean = z.column(c).mean();
        z.column_mut(c).add_scalar_mut(-mean);
    }
    let cov = z.transpose() * &z / m as f64;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Numerical("node covariance is singular".into()))?;
    let white = chol
        .l()
        .solve_lower_triangular(&z.transpose())
        .expect("triangular factor is invertible");
    Ok((0..m)
        .map(|j| {
            let mut out = [0.0; 6];
            for a in 0..dim {
                out[a] = datum.center[a] + spread[a] * white[(a, j)];
                out[3 + a] = datum.momentum[a] + spread[dim + a] * white[(dim + a, j)];
            }
            out
        })
        .collect())
}

/// Density matrix `(1/M) sum_j |z_j><z_j|` of coherent states on the nodes of
/// [`coherent_nodes`], returned in its orthonormal eigenbasis.
///
/// The first two moments of its Wigner transform equal those of the datum.
/// Eigenvalues below `1e-12` of the largest are dropped and the rest
/// renormalized; the eigenvectors get a Gram-Schmidt pass against rounding.
pub fn coherent_mixture(
    grid: &UniformGrid,
    datum: &GaussianDatum,
    hbar: f64,
    spin: [C64; 2],
    nodes: &CoherentNodes,
) -> Result<MixedState> {
    let d = grid.dim();
    let z = coherent_nodes(datum, d, hbar, nodes)?;
    let m = z.len();
    let mut width = [1.0; 3];
    for (a, w) in width.iter_mut().enumerate().take(d) {
        *w = coherent_width(datum, a, hbar);
    }
    let phis: Vec<Vec<C64>> = z
        .iter()
        .map(|n| {
            let psi = gaussian_packet(
                grid,
                [n[0], n[1], n[2]],
                [n[3], n[4], n[5]],
                width,
                hbar,
                SPIN_UP,
            )?;
            Ok(psi.component(0).to_vec())
        })
        .collect::<Result<_>>()?;
    let dv = grid.cell_volume();
    let mut gram = DMatrix::<C64>::zeros(m, m);
    for j in 0..m {
        for k in 0..=j {
            let g: C64 = phis[j]
                .iter()
                .zip(&phis[k])
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
                * dv;
            gram[(j, k)] = g;
            gram[(k, j)] = g.conj();
        }
    }
    let eig = SymmetricEigen::new(gram / C64::new(m as f64, 0.0));
    let top = eig.eigenvalues.max();
    let mut orbitals: Vec<SpinorField> = Vec::new();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut weights = Vec::new();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for i in order {
        let lam = eig.eigenvalues[i];
        if lam < 1e-12 * top {
            continue;
        }
        let u = eig.eigenvectors.column(i);
        let mut e = vec![C64::new(0.0, 0.0); grid.len()];
        for (j, phi) in phis.iter().enumerate() {
            let c = u[j];
            e.iter_mut().zip(phi).for_each(|(v, p)| *v += c * p);
        }
        let n = (e.iter().map(|v| v.norm_sqr()).sum::<f64>() * dv).sqrt();
        e.iter_mut().for_each(|v| *v /= n);
        for _ in 0..2 {
            for b in &basis {
                let ov: C64 = b.iter().zip(&e).map(|(u, v)| u.conj() * v).sum::<C64>() * dv;
                e.iter_mut().zip(b).for_each(|(v, u)| *v -= ov * u);
            }
        }
        let n = (e.iter().map(|v| v.norm_sqr()).sum::<f64>() * dv).sqrt();
        e.iter_mut().for_each(|v| *v /= n);
        orbitals.push(normalized(grid, &e, spin)?);
        basis.push(e);
        weights.push(lam);
    }
    MixedState::new(orbitals, renormalize(weights), hbar)
}

/// Rescales weights so that their sum is one to rounding.
fn renormalize(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}
