use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::field::C64;
use crate::fields::hartree::tabulate_fft_order;
use crate::fields::InteractionKernel;
use crate::grid::UniformGrid;
use crate::pauli::Mat2;
use crate::solver::stern_gerlach_rotation;

/// Largest number of complex amplitudes accepted for an N-body state.
pub const NBODY_AMPLITUDE_BUDGET: usize = 1 << 25;
pub const MAX_PARTICLES: usize = 4;
pub const MAX_POINTS: usize = 128;

/// One-particle orbital on a 1-d grid: `n` values, or `2n` with the spin
/// index slowest when spin is resolved.
pub type Orbital = Vec<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    HartreeProduct,
    Slater,
}

/// N-body wavefunction on the N-fold tensor grid. Each particle owns the
/// local index `q = s n + x` (spin slowest); particle 1 is the slowest axis.
#[derive(Debug, Clone, PartialEq)]
pub struct NBodyWavefunction {
    n_particles: usize,
    grid: UniformGrid,
    spin: bool,
    values: Vec<C64>,
}

pub(crate) fn check_layout(n_particles: usize, grid: &UniformGrid, spin: bool) -> Result<usize> {
    if !(1..=MAX_PARTICLES).contains(&n_particles) {
        return Err(Error::Config(format!(
            "particle count {n_particles} not in 1..={MAX_PARTICLES}"
        )));
    }
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid(
            "N-body grids are one-dimensional per particle".into(),
        ));
    }
    if grid.points(0) > MAX_POINTS {
        return Err(Error::InvalidGrid(format!(
            "at most {MAX_POINTS} points per particle"
        )));
    }
    let m = grid.points(0) * if spin { 2 } else { 1 };
    let total = (m as u128).pow(n_particles as u32);
    if total > NBODY_AMPLITUDE_BUDGET as u128 {
        return Err(Error::Budget {
            requested: total,
            budget: NBODY_AMPLITUDE_BUDGET as u128,
        });
    }
    Ok(total as usize)
}

fn orbital_overlap(a: &[C64], b: &[C64], dx: f64) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * dx
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(
        prefix: &mut Vec<usize>,
        left: &mut Vec<usize>,
        sign: f64,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if left.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..left.len() {
            let v = left.remove(i);
            prefix.push(v);
            rec(prefix, left, if i % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            left.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), 1.0, &mut out);
    out
}

impl NBodyWavefunction {
    pub fn new(
        n_particles: usize,
        grid: UniformGrid,
        spin: bool,
        values: Vec<C64>,
    ) -> Result<Self> {
        let total = check_layout(n_particles, &grid, spin)?;
        if values.len() != total {
            return Err(Error::InvalidState(format!(
                "expected {total} amplitudes, got {}",
                values.len()
            )));
        }
        Ok(Self {
            n_particles,
            grid,
            spin,
            values,
        })
    }

    /// Product `psi^{(x)N}` or the normalized Slater determinant of `orbitals`.
    pub fn build(
        kind: InitialKind,
        n_particles: usize,
        grid: UniformGrid,
        spin: bool,
        orbitals: &[Orbital],
    ) -> Result<Self> {
        let total = check_layout(n_particles, &grid, spin)?;
        let m = grid.points(0) * if spin { 2 } else { 1 };
        let dx = grid.spacing(0);
        for o in orbitals {
            if o.len() != m {
                return Err(Error::InvalidState(format!(
                    "orbital has {} values, expected {m}",
                    o.len()
                )));
            }
        }
        let digits = |mut idx: usize| {
            let mut q = [0usize; MAX_PARTICLES];
            for p in (0..n_particles).rev() {
                q[p] = idx % m;
                idx /= m;
            }
            q
        };
        let values: Vec<C64> = match kind {
            InitialKind::HartreeProduct => {
                let [psi] = orbitals else {
                    return Err(Error::InvalidState(
                        "a product state takes exactly one orbital".into(),
                    ));
                };
                let norm = orbital_overlap(psi, psi, dx).re.sqrt();
                if norm == 0.0 {
                    return Err(Error::InvalidState("zero orbital".into()));
                }
                (0..total)
                    .into_par_iter()
                    .map(|idx| {
                        let q = digits(idx);
                        (0..n_particles).map(|p| psi[q[p]] / norm).product()
                    })
                    .collect()
            }
            InitialKind::Slater => {
                if orbitals.len() != n_particles {
                    return Err(Error::InvalidState(format!(
                        "a Slater determinant of {n_particles} particles takes {n_particles} orbitals"
                    )));
                }
                for (i, a) in orbitals.iter().enumerate() {
                    for (j, b) in orbitals.iter().enumerate() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (orbital_overlap(a, b, dx) - target).norm() > 1e-8 {
                            return Err(Error::InvalidState(format!(
                                "Slater orbitals must be orthonormal (pair {i},{j})"
                            )));
                        }
                    }
                }
                let perms = permutations(n_particles);
                let norm = (1..=n_particles).product::<usize>() as f64;
                let scale = 1.0 / norm.sqrt();
                (0..total)
                    .into_par_iter()
                    .map(|idx| {
                        let q = digits(idx);
                        perms
                            .iter()
                            .map(|(p, s)| {
                                (0..n_particles)
                                    .map(|k| orbitals[p[k]][q[k]])
                                    .product::<C64>()
                                    * *s
                            })
                            .sum::<C64>()
                            * scale
                    })
                    .collect()
            }
        };
        Ok(Self {
            n_particles,
            grid,
            spin,
            values,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn spin(&self) -> bool {
        self.spin
    }

    /// Local dimension per particle.
    pub fn local_dim(&self) -> usize {
        self.grid.points(0) * if self.spin { 2 } else { 1 }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * self.grid.spacing(0).powi(self.n_particles as i32)
    }

    /// Amplitudes with particles `j` and `k` exchanged.
    pub fn transposed(&self, j: usize, k: usize) -> Self {
        let m = self.local_dim();
        let n = self.n_particles;
        let sj = m.pow((n - 1 - j) as u32);
        let sk = m.pow((n - 1 - k) as u32);
        let values = (0..self.values.len())
            .into_par_iter()
            .map(|idx| {
                let qj = (idx / sj) % m;
                let qk = (idx / sk) % m;
                let src = idx - qj * sj - qk * sk + qk * sj + qj * sk;
                self.values[src]
            })
            .collect();
        Self { values, ..*self }
    }

    /// `max_{j<k} ||psi + P_jk psi||`.
    pub fn antisymmetry_error(&self) -> f64 {
        self.exchange_error(1.0)
    }

    /// `max_{j<k} ||psi - P_jk psi||`.
    pub fn symmetry_error(&self) -> f64 {
        self.exchange_error(-1.0)
    }

    fn exchange_error(&self, sign: f64) -> f64 {
        let dv = self.grid.spacing(0).powi(self.n_particles as i32);
        let mut worst = 0.0f64;
        for j in 0..self.n_particles {
            for k in j + 1..self.n_particles {
                let t = self.transposed(j, k);
                let e: f64 = self
                    .values
                    .iter()
                    .zip(&t.values)
                    .map(|(a, b)| (a + b * sign).norm_sqr())
                    .sum();
                worst = worst.max((e * dv).sqrt());
            }
        }
        worst
    }

    /// `<self, other>` with the tensor-grid quadrature.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        let dv = self.grid.spacing(0).powi(self.n_particles as i32);
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * dv)
    }
}

/// Static parameters of the N-body Hamiltonian
/// `sum_i [-hbar^2/2 d_i^2 + V(x_i) - (hbar/2) sigma_i.B] + (1/N) sum_{j<k} W(x_j - x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NBodyHamiltonian {
    pub hbar: f64,
    /// External potential sampled on the one-particle grid.
    pub v_ext: Option<Vec<f64>>,
    pub kernel: Option<InteractionKernel>,
    /// Uniform field for the spin term (ignored without spin).
    pub b: [f64; 3],
}

impl NBodyHamiltonian {
    pub fn free(hbar: f64) -> Self {
        Self {
            hbar,
            v_ext: None,
            kernel: None,
            b: [0.0; 3],
        }
    }

    /// Diagonal potential `U(x_1..x_N)` on the spatial tensor grid.
    pub fn potential_table(&self, grid: &UniformGrid, n_particles: usize) -> Result<Vec<f64>> {
        let n = grid.points(0);
        let total = n.pow(n_particles as u32);
        if let Some(v) = &self.v_ext {
            if v.len() != n {
                return Err(Error::InvalidField(format!(
                    "external potential has {} values, expected {n}",
                    v.len()
                )));
            }
        }
        let w = match &self.kernel {
            Some(k) => {
                k.validate(grid)?;
                Some(tabulate_fft_order(grid, k))
            }
            None => None,
        };
        let scale = 1.0 / n_particles as f64;
        Ok((0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut x = [0usize; MAX_PARTICLES];
                for p in (0..n_particles).rev() {
                    x[p] = idx % n;
                    idx /= n;
                }
                let mut u = 0.0;
                if let Some(v) = &self.v_ext {
                    u += (0..n_particles).map(|p| v[x[p]]).sum::<f64>();
                }
                if let Some(w) = &w {
                    for j in 0..n_particles {
                        for k in j + 1..n_particles {
                            u += scale * w[(x[j] + n - x[k]) % n];
                        }
                    }
                }
                u
            })
            .collect())
    }
}

/// Strang propagator `e^{-i dt U/2hbar} e^{-i dt T/hbar} e^{-i dt U/2hbar}` for a
/// fixed layout, Hamiltonian and `dt`.
#[derive(Debug, Clone)]
pub struct NBodyPropagator {
    n_particles: usize,
    grid: UniformGrid,
    spin: bool,
    shape: Vec<usize>,
    fft: NdFft,
    half_phase: Vec<C64>,
    kinetic: Vec<C64>,
    spin_half: Option<Mat2>,
    dt: f64,
}

impl NBodyPropagator {
    pub fn new(
        n_particles: usize,
        grid: UniformGrid,
        spin: bool,
        h: &NBodyHamiltonian,
        dt: f64,
    ) -> Result<Self> {
        check_layout(n_particles, &grid, spin)?;
        if !(dt > 0.0 && dt.is_finite()) || !(h.hbar > 0.0) {
            return Err(Error::Config("dt and hbar must be positive".into()));
        }
        let n = grid.points(0);
        let shape: Vec<usize> = (0..n_particles)
            .flat_map(|_| if spin { vec![2, n] } else { vec![n] })
            .collect();
        let u = h.potential_table(&grid, n_particles)?;
        let half_phase = u
            .iter()
            .map(|&v| C64::from_polar(1.0, -0.5 * dt * v / h.hbar))
            .collect();
        let kinetic = grid
            .derivative_wavenumbers(0)
            .iter()
            .map(|k| C64::from_polar(1.0, -0.5 * dt * h.hbar * k * k))
            .collect();
        let spin_half =
            (spin && h.b.iter().any(|&b| b != 0.0)).then(|| stern_gerlach_rotation(h.b, 0.5 * dt));
        Ok(Self {
            n_particles,
            grid,
            spin,
            fft: NdFft::new(&shape),
            shape,
            half_phase,
            kinetic,
            spin_half,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn axis_stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    fn potential_half(&self, psi: &mut [C64]) {
        let nx = self.half_phase.len();
        if self.spin {
            // Spatial index: drop the spin digits.
            let n = self.grid.points(0);
            let np = self.n_particles;
            psi.par_iter_mut().enumerate().for_each(|(idx, v)| {
                let mut rest = idx;
                let mut x = 0;
                let mut mul = 1;
                for _ in 0..np {
                    x += (rest % n) * mul;
                    rest /= n;
                    rest /= 2;
                    mul *= n;
                }
                *v *= self.half_phase[x];
            });
        } else {
            debug_assert_eq!(nx, psi.len());
            psi.par_iter_mut()
                .zip(&self.half_phase)
                .for_each(|(v, p)| *v *= p);
        }
        if let Some(u) = &self.spin_half {
            for p in 0..self.n_particles {
                let axis = 2 * p;
                let stride = self.axis_stride(axis);
                let block = 2 * stride;
                psi.par_chunks_mut(block).for_each(|c| {
                    let (up, down) = c.split_at_mut(stride);
                    for (a, b) in up.iter_mut().zip(down.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = u[0][0] * x + u[0][1] * y;
                        *b = u[1][0] * x + u[1][1] * y;
                    }
                });
            }
        }
    }

    fn kinetic_full(&self, psi: &mut [C64]) {
        let n = self.grid.points(0);
        for p in 0..self.n_particles {
            let axis = if self.spin { 2 * p + 1 } else { p };
            self.fft.forward_axis(psi, axis);
            let stride = self.axis_stride(axis);
            psi.par_iter_mut()
                .enumerate()
                .for_each(|(idx, v)| *v *= self.kinetic[(idx / stride) % n]);
            self.fft.inverse_axis(psi, axis);
        }
    }

    pub fn step(&self, psi: &mut NBodyWavefunction) -> Result<()> {
        if psi.n_particles != self.n_particles
            || psi.spin != self.spin
            || !psi.grid.same_as(&self.grid)
        {
            return Err(Error::GridMismatch);
        }
        let v = psi.values_mut();
        self.potential_half(v);
        self.kinetic_full(v);
        self.potential_half(v);
        Ok(())
    }
}
