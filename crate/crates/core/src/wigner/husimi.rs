use rayon::prelude::*;

use super::grid::PhaseSpaceField;
use super::transform::{OffsetLattice, WignerMatrix};
use crate::fft::NdFft;
use crate::field::C64;

/// Husimi function of `Tr F`: convolution with the normalized Gaussian
/// `(pi hbar)^-d exp(-(|x|^2 + |xi|^2) / hbar)`.
///
/// The position convolution is a spectral multiplier `exp(-hbar |k|^2 / 4)`;
/// the momentum convolution is the multiplier `exp(-hbar |y|^2 / 4)` in the
/// offset representation `y = 2 s / hbar`.
pub fn husimi(f: &WignerMatrix) -> PhaseSpaceField {
    let grid = *f.grid();
    let xg = *grid.x();
    let d = grid.dim();
    let hbar = grid.hbar();
    let lat = OffsetLattice::new(&grid);
    let nxi = grid.xi_len();
    let tr = f.trace();
    let mut data: Vec<C64> = tr.values().iter().map(|&v| C64::new(v, 0.0)).collect();

    let damp: Vec<f64> = lat
        .offsets()
        .iter()
        .map(|m| {
            let s = lat.offset_vector(*m);
            let y2: f64 = s.iter().map(|v| (2.0 * v / hbar).powi(2)).sum();
            (-0.25 * hbar * y2).exp()
        })
        .collect();
    data.par_chunks_mut(nxi).for_each(|block| {
        lat.to_offset(block);
        block.iter_mut().zip(&damp).for_each(|(v, w)| *v *= w);
        lat.to_momentum(block);
    });

    let s = xg.shape();
    let fft = NdFft::new(&[s[0], s[1], s[2], nxi]);
    let k: Vec<Vec<f64>> = (0..3).map(|a| xg.wavenumbers(a)).collect();
    for a in 0..d {
        fft.forward_axis(&mut data, a);
    }
    data.par_chunks_mut(nxi)
        .enumerate()
        .for_each(|(ix, block)| {
            let i = xg.unravel(ix);
            let k2: f64 = (0..d).map(|a| k[a][i[a]].powi(2)).sum();
            let w = (-0.25 * hbar * k2).exp();
            block.iter_mut().for_each(|v| *v *= w);
        });
    for a in 0..d {
        fft.inverse_axis(&mut data, a);
    }
    PhaseSpaceField::new(grid, data.into_iter().map(|v| v.re).collect()).expect("husimi length")
}
