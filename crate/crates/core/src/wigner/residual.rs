use rayon::prelude::*;

use super::theta::{pauli_offset_map, RefinedSymbol, Symbol};
use super::transform::{OffsetLattice, WignerMatrix};
use crate::error::Result;
use crate::fft::NdFft;
use crate::field::{ScalarField, C64};
use crate::gauge::GaugeField;
use crate::solver::{PauliSolver, SolverConfig};
use crate::state::MixedState;

/// Right-hand side `L F` of the Pauli-Wigner equation `dF/dt + L F = 0`:
///
/// `L F = xi.grad_x F - beta[A].grad_x F - theta[A].(xi F) + 1/2 theta[|A|^2] F
///        + theta[W] F + theta[V] F - beta[div A] F`
///
/// with `W = -(hbar/2) sigma.B` acting from the left at `x + s` and from the
/// right at `x - s`, and `V = V_ext + v_sc`. Every term except the transport
/// term is a multiplication in the offset representation.
pub fn pauli_wigner_operator(
    f: &WignerMatrix,
    v_sc: Option<&ScalarField>,
    gauge: &GaugeField,
) -> Result<WignerMatrix> {
    let grid = *f.grid();
    let xg = *grid.x();
    xg.ensure_same(gauge.grid())?;
    let d = grid.dim();
    let hbar = grid.hbar();
    let lat = OffsetLattice::new(&grid);
    let nxi = grid.xi_len();

    let lin = gauge.linear();
    let per = gauge.periodic();
    let a_syms: Vec<RefinedSymbol> = (0..3)
        .map(|j| {
            RefinedSymbol::new(
                &Symbol {
                    linear: lin[j],
                    periodic: Some(per.component_field(j)),
                },
                &grid,
            )
        })
        .collect::<Result<_>>()?;
    let mut v = gauge.v_ext().clone();
    if let Some(vs) = v_sc {
        v = v.zip_with(vs, |a, b| a + b)?;
    }
    let v_sym = RefinedSymbol::new(&Symbol::field(v), &grid)?;
    let div_sym = RefinedSymbol::new(&Symbol::field(gauge.divergence()?), &grid)?;
    let has_a = gauge.has_vector_potential();

    // Transport term and x-derivatives on the [x0, x1, x2, xi] array.
    let s = xg.shape();
    let fft = NdFft::new(&[s[0], s[1], s[2], nxi]);
    let kd: Vec<Vec<f64>> = (0..d).map(|a| xg.derivative_wavenumbers(a)).collect();
    let xis: Vec<[f64; 3]> = (0..nxi).map(|k| grid.xi_at(k)).collect();
    let stride = |a: usize| -> usize { s[a + 1..].iter().product::<usize>() * nxi };

    let mut out = WignerMatrix::zeros(grid);
    for c in 0..4 {
        let src = &f.components()[c];
        let mut grads: Vec<Vec<C64>> = Vec::with_capacity(d);
        for a in 0..d {
            let mut g = src.clone();
            fft.forward_axis(&mut g, a);
            let st = stride(a);
            let n = s[a];
            g.par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v *= C64::new(0.0, kd[a][(i / st) % n]));
            fft.inverse_axis(&mut g, a);
            grads.push(g);
        }
        let dst = &mut out.components_mut()[c];
        dst.par_chunks_mut(nxi).enumerate().for_each(|(ix, block)| {
            let off = ix * nxi;
            let i = xg.unravel(ix);
            let x = xg.position(ix);
            // Offset-space accumulator.
            let mut acc = src[off..off + nxi].to_vec();
            lat.to_offset(&mut acc);
            let base = acc.clone();
            let mut grad_off: Vec<Vec<C64>> = Vec::new();
            let mut xif_off: Vec<Vec<C64>> = Vec::new();
            if has_a {
                for a in 0..d {
                    let mut gblk = grads[a][off..off + nxi].to_vec();
                    lat.to_offset(&mut gblk);
                    grad_off.push(gblk);
                    let mut xf: Vec<C64> = src[off..off + nxi]
                        .iter()
                        .zip(&xis)
                        .map(|(v, xi)| v * xi[a])
                        .collect();
                    lat.to_offset(&mut xf);
                    xif_off.push(xf);
                }
            }
            for (j, m) in lat.offsets().iter().enumerate() {
                let sv = lat.offset_vector(*m);
                let (u, w) = lat.pair(i, *m);
                let (vu, vw) = v_sym.pair(x, sv, u, w);
                let mut total = C64::new(0.0, (vu - vw) / hbar) * base[j];
                if has_a {
                    let mut au = [0.0; 3];
                    let mut aw = [0.0; 3];
                    for k in 0..3 {
                        (au[k], aw[k]) = a_syms[k].pair(x, sv, u, w);
                    }
                    let a2u: f64 = au.iter().map(|q| q * q).sum();
                    let a2w: f64 = aw.iter().map(|q| q * q).sum();
                    total += C64::new(0.0, 0.5 * (a2u - a2w) / hbar) * base[j];
                    for a in 0..d {
                        total -= grad_off[a][j] * (0.5 * (au[a] + aw[a]));
                        total -= C64::new(0.0, (au[a] - aw[a]) / hbar) * xif_off[a][j];
                    }
                    let (du, dw) = div_sym.pair(x, sv, u, w);
                    total -= base[j] * (0.5 * (du + dw));
                }
                acc[j] = total;
            }
            lat.to_momentum(&mut acc);
            for (k, (o, a)) in block.iter_mut().zip(acc).enumerate() {
                let mut t = a;
                for q in 0..d {
                    t += grads[q][off + k] * xis[k][q];
                }
                *o = t;
            }
        });
    }

    if gauge.has_magnetic_field() {
        let b = gauge.b();
        let b_syms = [
            RefinedSymbol::new(&Symbol::field(b.component_field(0)), &grid)?,
            RefinedSymbol::new(&Symbol::field(b.component_field(1)), &grid)?,
            RefinedSymbol::new(&Symbol::field(b.component_field(2)), &grid)?,
        ];
        // theta[-(hbar/2) sigma.B] = -(i/2)(sigma.B(x+s) C - C sigma.B(x-s)).
        let sg = pauli_offset_map(&lat, &b_syms, C64::new(0.0, -0.5), f);
        out.axpy(C64::new(1.0, 0.0), &sg)?;
    }
    Ok(out)
}

/// `|| dF/dt + L F ||_2` for a supplied time derivative.
pub fn pauli_wigner_residual(
    f: &WignerMatrix,
    v_sc: Option<&ScalarField>,
    gauge: &GaugeField,
    df_dt: &WignerMatrix,
) -> Result<f64> {
    f.grid().ensure_same(df_dt.grid())?;
    let mut r = pauli_wigner_operator(f, v_sc, gauge)?;
    r.axpy(C64::new(1.0, 0.0), df_dt)?;
    Ok(r.l2_norm())
}

/// Propagates `state` with `cfg` to `t_center` and returns the residual of the
/// transformed solution there, with `dF/dt` taken as the central difference of
/// the transforms one step before and after.
pub fn residual_along_trajectory(
    state: &MixedState,
    gauge: &GaugeField,
    cfg: &SolverConfig,
    t_center: f64,
) -> Result<f64> {
    let n = (t_center / cfg.dt).round() as usize;
    if n == 0 {
        return Err(crate::error::Error::Config(
            "t_center must be at least one step".into(),
        ));
    }
    let mut solver = PauliSolver::new(state, gauge, cfg)?;
    let mut s = state.clone();
    for _ in 0..n - 1 {
        solver.step(&mut s)?;
    }
    let mut df = super::wigner_transform(&s)?;
    solver.step(&mut s)?;
    let f = super::wigner_transform(&s)?;
    let v = solver.potential().cloned();
    let g = solver.gauge().clone();
    solver.step(&mut s)?;
    let next = super::wigner_transform(&s)?;
    df = next.sub(&df)?.scaled(0.5 / cfg.dt);
    drop(next);
    pauli_wigner_residual(&f, v.as_ref(), &g, &df)
}
