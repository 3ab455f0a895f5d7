use rayon::prelude::*;

use super::grid::PhaseSpaceGrid;
use super::transform::{refine_real, OffsetLattice, WignerMatrix};
use crate::error::{Error, Result};
use crate::field::{ScalarField, C64};
use crate::pauli::{mat_mul, sigma_dot, Mat2};

/// Real symbol `g(x) = a.x + g_per(x)` with `g_per` periodic on the position
/// grid. The linear part is evaluated at unwrapped points.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub linear: [f64; 3],
    pub periodic: Option<ScalarField>,
}

impl Symbol {
    pub fn field(g: ScalarField) -> Self {
        Self {
            linear: [0.0; 3],
            periodic: Some(g),
        }
    }

    pub fn linear(a: [f64; 3]) -> Self {
        Self {
            linear: a,
            periodic: None,
        }
    }
}

/// A symbol sampled on the refined grid of an offset lattice.
#[derive(Debug, Clone)]
pub(crate) struct RefinedSymbol {
    linear: [f64; 3],
    fine: Option<Vec<f64>>,
}

impl RefinedSymbol {
    pub fn new(g: &Symbol, grid: &PhaseSpaceGrid) -> Result<Self> {
        let fine = match &g.periodic {
            Some(f) => {
                grid.x().ensure_same(f.grid())?;
                Some(refine_real(f))
            }
            None => None,
        };
        Ok(Self {
            linear: g.linear,
            fine,
        })
    }

    /// `(g(x + s), g(x - s))` for position `x` and unwrapped offset `s`.
    #[inline]
    pub fn pair(&self, x: [f64; 3], s: [f64; 3], u: usize, v: usize) -> (f64, f64) {
        let mut gu = 0.0;
        let mut gv = 0.0;
        for a in 0..3 {
            gu += self.linear[a] * (x[a] + s[a]);
            gv += self.linear[a] * (x[a] - s[a]);
        }
        if let Some(f) = &self.fine {
            gu += f[u];
            gv += f[v];
        }
        (gu, gv)
    }
}

/// Applies `f(ix, m, C)` to the offset representation of all four components
/// jointly, one position at a time.
pub(crate) fn map_offset_matrix<F>(lat: &OffsetLattice, w: &WignerMatrix, f: F) -> WignerMatrix
where
    F: Fn(usize, usize, [isize; 3], &mut Mat2) + Sync,
{
    let nxi = lat.grid.xi_len();
    let mut out = w.clone();
    let [c0, c1, c2, c3] = out.components_mut();
    (
        c0.par_chunks_mut(nxi),
        c1.par_chunks_mut(nxi),
        c2.par_chunks_mut(nxi),
        c3.par_chunks_mut(nxi),
    )
        .into_par_iter()
        .enumerate()
        .for_each(|(ix, (b0, b1, b2, b3))| {
            for b in [&mut *b0, &mut *b1, &mut *b2, &mut *b3] {
                lat.to_offset(b);
            }
            for (j, m) in lat.offsets().iter().enumerate() {
                let mut c = [[b0[j], b1[j]], [b2[j], b3[j]]];
                f(ix, j, *m, &mut c);
                b0[j] = c[0][0];
                b1[j] = c[0][1];
                b2[j] = c[1][0];
                b3[j] = c[1][1];
            }
            for b in [b0, b1, b2, b3] {
                lat.to_momentum(b);
            }
        });
    out
}

fn scalar_map<F>(g: &Symbol, phi: &WignerMatrix, f: F) -> Result<WignerMatrix>
where
    F: Fn(f64, f64) -> C64 + Sync,
{
    let grid = *phi.grid();
    let lat = OffsetLattice::new(&grid);
    let sym = RefinedSymbol::new(g, &grid)?;
    let xg = *grid.x();
    let svec: Vec<[f64; 3]> = lat
        .offsets()
        .iter()
        .map(|m| lat.offset_vector(*m))
        .collect();
    Ok(lat.map_offset(phi, |_, ix, block| {
        let i = xg.unravel(ix);
        let x = xg.position(ix);
        for ((v, m), s) in block.iter_mut().zip(lat.offsets()).zip(&svec) {
            let (a, b) = lat.pair(i, *m);
            let (gu, gv) = sym.pair(x, *s, a, b);
            *v *= f(gu, gv);
        }
    }))
}

/// `theta[g] Phi`: multiplication by `delta[g] = (i/hbar)(g(x + hbar y/2) - g(x - hbar y/2))`
/// in the offset representation. For `g = a.x` this is `-a.grad_xi Phi`.
pub fn theta_apply(g: &Symbol, phi: &WignerMatrix) -> Result<WignerMatrix> {
    let c = 1.0 / phi.hbar();
    scalar_map(g, phi, |gu, gv| C64::new(0.0, c * (gu - gv)))
}

/// `F_y[beta[g]] *_xi Phi` with `beta[g] = (g(x + hbar y/2) + g(x - hbar y/2)) / 2`.
pub fn beta_apply(g: &Symbol, phi: &WignerMatrix) -> Result<WignerMatrix> {
    scalar_map(g, phi, |gu, gv| C64::new(0.5 * (gu + gv), 0.0))
}

/// `theta[sigma.b] Phi` for a matrix symbol, acting as
/// `(i/hbar)(sigma.b(x + s) C - C sigma.b(x - s))` on the offset kernel `C`.
/// For scalar multiples of the identity this reduces to [`theta_apply`].
pub fn theta_apply_pauli(b: [&Symbol; 3], phi: &WignerMatrix) -> Result<WignerMatrix> {
    let grid = *phi.grid();
    let lat = OffsetLattice::new(&grid);
    let syms = [
        RefinedSymbol::new(b[0], &grid)?,
        RefinedSymbol::new(b[1], &grid)?,
        RefinedSymbol::new(b[2], &grid)?,
    ];
    Ok(pauli_offset_map(
        &lat,
        &syms,
        C64::new(0.0, 1.0 / phi.hbar()),
        phi,
    ))
}

pub(crate) fn pauli_offset_map(
    lat: &OffsetLattice,
    syms: &[RefinedSymbol; 3],
    scale: C64,
    phi: &WignerMatrix,
) -> WignerMatrix {
    let xg = *lat.grid.x();
    map_offset_matrix(lat, phi, |ix, _, m, c| {
        let i = xg.unravel(ix);
        let x = xg.position(ix);
        let s = lat.offset_vector(m);
        let (u, v) = lat.pair(i, m);
        let mut bu = [0.0; 3];
        let mut bv = [0.0; 3];
        for k in 0..3 {
            (bu[k], bv[k]) = syms[k].pair(x, s, u, v);
        }
        let wu = sigma_dot(bu);
        let wv = sigma_dot(bv);
        let l = mat_mul(&wu, c);
        let r = mat_mul(c, &wv);
        for a in 0..2 {
            for b in 0..2 {
                c[a][b] = scale * (l[a][b] - r[a][b]);
            }
        }
    })
}

/// `grad_xi Phi` along one axis by spectral differentiation on the momentum lattice.
pub fn xi_derivative(phi: &WignerMatrix, axis: usize) -> Result<WignerMatrix> {
    if axis >= phi.grid().dim() {
        return Err(Error::InvalidField(format!("axis {axis} is not active")));
    }
    let a = [
        (axis == 0) as u8 as f64,
        (axis == 1) as u8 as f64,
        (axis == 2) as u8 as f64,
    ];
    Ok(theta_apply(&Symbol::linear(a), phi)?.scaled(-1.0))
}
