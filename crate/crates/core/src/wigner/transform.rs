use rayon::prelude::*;

use super::grid::{PhaseSpaceField, PhaseSpaceGrid};
use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::field::{ScalarField, VectorField, C64};
use crate::gauge::GaugeField;
use crate::grid::UniformGrid;
use crate::pauli::Mat2;
use crate::state::MixedState;

/// 2x2 matrix-valued phase-space function; component `(a, b)` is stored at
/// `comps[2a + b]` with layout `[ix * xi_len + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMatrix {
    grid: PhaseSpaceGrid,
    comps: [Vec<C64>; 4],
}

impl WignerMatrix {
    pub fn zeros(grid: PhaseSpaceGrid) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z.clone(), z],
        }
    }

    pub fn from_components(grid: PhaseSpaceGrid, comps: [Vec<C64>; 4]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidField(
                "component length does not match the phase-space grid".into(),
            ));
        }
        Ok(Self { grid, comps })
    }

    /// `F = f M` for a scalar field `f` and a constant matrix `M`.
    pub fn from_scalar(f: &PhaseSpaceField, m: Mat2) -> Self {
        let comps =
            std::array::from_fn(|c| f.values().iter().map(|&v| m[c / 2][c % 2] * v).collect());
        Self {
            grid: *f.grid(),
            comps,
        }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.grid.hbar()
    }

    pub fn component(&self, a: usize, b: usize) -> &[C64] {
        &self.comps[2 * a + b]
    }

    pub fn component_mut(&mut self, a: usize, b: usize) -> &mut [C64] {
        &mut self.comps[2 * a + b]
    }

    pub fn components(&self) -> &[Vec<C64>; 4] {
        &self.comps
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<C64>; 4] {
        &mut self.comps
    }

    /// Real part of the trace, `f = Tr F`.
    pub fn trace(&self) -> PhaseSpaceField {
        let v = self.comps[0]
            .iter()
            .zip(&self.comps[3])
            .map(|(a, d)| (a + d).re)
            .collect();
        PhaseSpaceField::new(self.grid, v).expect("trace length")
    }

    /// Largest `|Im Tr F|`.
    pub fn max_trace_imag(&self) -> f64 {
        self.comps[0]
            .iter()
            .zip(&self.comps[3])
            .fold(0.0, |m, (a, d)| m.max((a + d).im.abs()))
    }

    /// Largest entry of `F - F^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut e = 0.0f64;
        for i in 0..self.grid.len() {
            e = e
                .max(self.comps[0][i].im.abs())
                .max(self.comps[3][i].im.abs());
            e = e.max((self.comps[1][i] - self.comps[2][i].conj()).norm());
        }
        e
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Frobenius `L^2` norm over phase space.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flatten().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn axpy(&mut self, a: C64, other: &WignerMatrix) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            c.iter_mut().zip(o).for_each(|(x, y)| *x += a * y);
        }
        Ok(())
    }

    pub fn sub(&self, other: &WignerMatrix) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.comps.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }
}

/// Band-limited interpolation onto a grid with twice the points on every
/// active axis. The coarse Nyquist coefficient is split evenly between the
/// two fine modes so that real data stays real.
pub(crate) fn refine(grid: &UniformGrid, data: &[C64]) -> Vec<C64> {
    let shape = grid.shape();
    let d = grid.dim();
    let mut fshape = shape;
    for s in fshape.iter_mut().take(d) {
        *s *= 2;
    }
    let coarse_fft = NdFft::new(&shape);
    let fine_fft = NdFft::new(&fshape);
    let mut spec = data.to_vec();
    coarse_fft.forward_all(&mut spec);
    let mut out = vec![C64::new(0.0, 0.0); fshape.iter().product()];
    let scale = (1 << d) as f64;
    for (idx, &c) in spec.iter().enumerate() {
        let i = grid.unravel(idx);
        let mut targets: Vec<([usize; 3], f64)> = vec![([0; 3], scale)];
        for a in 0..d {
            let n = shape[a];
            let mut next = Vec::with_capacity(targets.len() * 2);
            for (t, w) in targets {
                if i[a] == n / 2 {
                    let mut lo = t;
                    lo[a] = 2 * n - n / 2;
                    let mut hi = t;
                    hi[a] = n / 2;
                    next.push((lo, 0.5 * w));
                    next.push((hi, 0.5 * w));
                } else {
                    let mut t2 = t;
                    t2[a] = if i[a] < n / 2 { i[a] } else { i[a] + n };
                    next.push((t2, w));
                }
            }
            targets = next;
        }
        for (t, w) in targets {
            out[(t[0] * fshape[1] + t[1]) * fshape[2] + t[2]] += c * w;
        }
    }
    fine_fft.inverse_all(&mut out);
    out
}

pub(crate) fn refine_real(field: &ScalarField) -> Vec<f64> {
    let c: Vec<C64> = field.values().iter().map(|&v| C64::new(v, 0.0)).collect();
    refine(field.grid(), &c).into_iter().map(|v| v.re).collect()
}

/// Index bookkeeping between phase-space points and pairs `(x + s, x - s)`
/// on the refined grid.
#[derive(Debug, Clone)]
pub(crate) struct OffsetLattice {
    pub grid: PhaseSpaceGrid,
    pub fine: UniformGrid,
    fft: NdFft,
    /// `prod_a (h_a / 2) / (pi hbar)`.
    norm: f64,
    /// Signed offset index per axis for every lattice slot.
    offsets: Vec<[isize; 3]>,
    /// Minimal-image weight: pairs with `|u - v| > L/2` on some axis get 0,
    /// pairs at exactly `L/2` share the weight evenly.
    window: Vec<f64>,
}

impl OffsetLattice {
    pub fn new(grid: &PhaseSpaceGrid) -> Self {
        let xs = grid.x();
        let d = grid.dim();
        let xi = grid.xi_shape();
        let norm = (0..d)
            .map(|a| 0.5 * xs.spacing(a) / (std::f64::consts::PI * grid.hbar()))
            .product();
        let offsets: Vec<[isize; 3]> = (0..grid.xi_len())
            .map(|k| {
                let j = grid.xi_unravel(k);
                let mut m = [0isize; 3];
                for a in 0..d {
                    let n2 = xi[a] as isize;
                    let v = j[a] as isize;
                    m[a] = if v < n2 / 2 { v } else { v - n2 };
                }
                m
            })
            .collect();
        let window = offsets
            .iter()
            .map(|m: &[isize; 3]| {
                (0..d)
                    .map(|a| {
                        let half = (xi[a] / 4) as isize;
                        match m[a].abs().cmp(&half) {
                            std::cmp::Ordering::Less => 1.0,
                            std::cmp::Ordering::Equal => 0.5,
                            std::cmp::Ordering::Greater => 0.0,
                        }
                    })
                    .product()
            })
            .collect();
        Self {
            grid: *grid,
            fine: grid.fine(),
            fft: NdFft::new(&xi),
            norm,
            offsets,
            window,
        }
    }

    pub fn offsets(&self) -> &[[isize; 3]] {
        &self.offsets
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Refined-grid indices of `x_ix + s_m` and `x_ix - s_m`.
    #[inline]
    pub fn pair(&self, ix: [usize; 3], m: [isize; 3]) -> (usize, usize) {
        let base = [2 * ix[0] as isize, 2 * ix[1] as isize, 2 * ix[2] as isize];
        let d = self.grid.dim();
        let mut u = [0isize; 3];
        let mut v = [0isize; 3];
        for a in 0..d {
            u[a] = base[a] + m[a];
            v[a] = base[a] - m[a];
        }
        (self.fine.shifted([0; 3], u), self.fine.shifted([0; 3], v))
    }

    /// Unwrapped physical displacement `s_m`.
    pub fn offset_vector(&self, m: [isize; 3]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for (a, v) in s.iter_mut().enumerate().take(self.grid.dim()) {
            *v = m[a] as f64 * 0.5 * self.grid.x().spacing(a);
        }
        s
    }

    fn sign(m: [isize; 3]) -> f64 {
        if (m[0] + m[1] + m[2]).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Offset representation of one x-block to the momentum representation, in place.
    pub fn to_momentum(&self, block: &mut [C64]) {
        for (v, m) in block.iter_mut().zip(&self.offsets) {
            *v *= Self::sign(*m) * self.norm;
        }
        self.fft.forward_all(block);
    }

    /// Inverse of [`OffsetLattice::to_momentum`].
    pub fn to_offset(&self, block: &mut [C64]) {
        self.fft.inverse_all(block);
        for (v, m) in block.iter_mut().zip(&self.offsets) {
            *v *= Self::sign(*m) / self.norm;
        }
    }

    /// Applies `f(ix, block)` to the offset representation of every component.
    pub fn map_offset<F>(&self, w: &WignerMatrix, f: F) -> WignerMatrix
    where
        F: Fn(usize, usize, &mut [C64]) + Sync,
    {
        let nxi = self.grid.xi_len();
        let mut out = w.clone();
        for (c, comp) in out.components_mut().iter_mut().enumerate() {
            comp.par_chunks_mut(nxi)
                .enumerate()
                .for_each(|(ix, block)| {
                    self.to_offset(block);
                    f(c, ix, block);
                    self.to_momentum(block);
                });
        }
        out
    }
}

/// Wigner matrix `F(x, xi) = (2 pi)^-d int e^{-i xi.y} R(x + hbar y/2, x - hbar y/2) dy`
/// of a mixed state on its own phase-space grid. Pairs `(x + s, x - s)` are
/// taken at their minimal periodic separation, which removes the ghost copy a
/// periodic kernel would otherwise leave at the antipodal position.
pub fn wigner_transform(state: &MixedState) -> Result<WignerMatrix> {
    let grid = PhaseSpaceGrid::new(*state.grid(), state.hbar())?;
    wigner_transform_on(state, &grid)
}

pub fn wigner_transform_on(state: &MixedState, grid: &PhaseSpaceGrid) -> Result<WignerMatrix> {
    state.grid().ensure_same(grid.x())?;
    if (state.hbar() - grid.hbar()).abs() > 0.0 {
        return Err(Error::InvalidState(
            "phase-space grid built for a different hbar".into(),
        ));
    }
    let lat = OffsetLattice::new(grid);
    let xg = *grid.x();
    let refined: Vec<[Vec<C64>; 2]> = state
        .orbitals()
        .par_iter()
        .map(|p| [refine(&xg, p.component(0)), refine(&xg, p.component(1))])
        .collect();
    let weights = state.weights();
    let nxi = grid.xi_len();
    let mut comps: [Vec<C64>; 4] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); grid.len()]);
    for (c, comp) in comps.iter_mut().enumerate() {
        let (a, b) = (c / 2, c % 2);
        comp.par_chunks_mut(nxi)
            .enumerate()
            .for_each(|(ix, block)| {
                let i = xg.unravel(ix);
                for ((slot, m), &wt) in block.iter_mut().zip(lat.offsets()).zip(lat.window()) {
                    if wt == 0.0 {
                        *slot = C64::new(0.0, 0.0);
                        continue;
                    }
                    let (u, v) = lat.pair(i, *m);
                    let mut acc = C64::new(0.0, 0.0);
                    for (r, &w) in refined.iter().zip(weights) {
                        acc += r[a][u] * r[b][v].conj() * w;
                    }
                    *slot = acc * wt;
                }
                lat.to_momentum(block);
            });
    }
    WignerMatrix::from_components(*grid, comps)
}

/// `R_diag(x) = int F dxi`, per matrix component.
pub fn wigner_matrix_density(f: &WignerMatrix) -> [Vec<C64>; 4] {
    let nxi = f.grid().xi_len();
    let dxi = f.grid().xi_cell();
    std::array::from_fn(|c| {
        f.components()[c]
            .chunks(nxi)
            .map(|b| b.iter().sum::<C64>() * dxi)
            .collect()
    })
}

/// `rho(x) = int Tr F dxi`.
pub fn wigner_density_moment(f: &WignerMatrix) -> ScalarField {
    let tr = f.trace();
    let nxi = f.grid().xi_len();
    let dxi = f.grid().xi_cell();
    let v = tr
        .values()
        .chunks(nxi)
        .map(|b| b.iter().sum::<f64>() * dxi)
        .collect();
    ScalarField::new(*f.grid().x(), v).expect("moment length")
}

/// `int xi Tr F dxi`, the canonical-momentum current.
pub fn wigner_current_moment(f: &WignerMatrix) -> VectorField {
    let g = f.grid();
    let tr = f.trace();
    let nxi = g.xi_len();
    let dxi = g.xi_cell();
    let xis: Vec<[f64; 3]> = (0..nxi).map(|k| g.xi_at(k)).collect();
    let mut comps = [
        vec![0.0; g.x().len()],
        vec![0.0; g.x().len()],
        vec![0.0; g.x().len()],
    ];
    for (ix, b) in tr.values().chunks(nxi).enumerate() {
        for (v, xi) in b.iter().zip(&xis) {
            for a in 0..g.dim() {
                comps[a][ix] += xi[a] * v;
            }
        }
        for c in comps.iter_mut() {
            c[ix] *= dxi;
        }
    }
    VectorField::new(*g.x(), comps).expect("moment length")
}

/// `int (xi - A(x)) Tr F dxi`, which equals the convective Pauli current.
pub fn wigner_kinetic_current_moment(f: &WignerMatrix, gauge: &GaugeField) -> Result<VectorField> {
    f.grid().x().ensure_same(gauge.grid())?;
    let j = wigner_current_moment(f);
    let rho = wigner_density_moment(f);
    let a = gauge.a_total();
    let comps = std::array::from_fn(|c| {
        j.component(c)
            .iter()
            .zip(a.component(c))
            .zip(rho.values())
            .map(|((j, a), r)| j - a * r)
            .collect()
    });
    VectorField::new(*f.grid().x(), comps)
}

/// `int Tr F dx` on the momentum lattice.
pub fn wigner_momentum_marginal(f: &WignerMatrix) -> Vec<f64> {
    let g = f.grid();
    let tr = f.trace();
    let nxi = g.xi_len();
    let dx = g.x().cell_volume();
    let mut out = vec![0.0; nxi];
    for b in tr.values().chunks(nxi) {
        out.iter_mut().zip(b).for_each(|(o, v)| *o += v);
    }
    out.iter_mut().for_each(|v| *v *= dx);
    out
}
