//! Pauli Hamiltonian and physical observables of mixed states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField, C64};
use crate::gauge::GaugeField;
use crate::pauli::sigma_dot;
use crate::spectral::Spectral;
use crate::state::MixedState;

/// Energy components of a mixed state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub stern_gerlach: f64,
    pub external: f64,
    #[serde(rename = "self")]
    pub self_energy: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic + self.stern_gerlach + self.external + self.self_energy
    }
}

/// `H = -1/2 sum_j D_j D_j + V_ext + V_sc - (hbar/2) sigma.B` with
/// `D_j = hbar d_j - i A_j`, evaluated pseudo-spectrally.
#[derive(Debug, Clone)]
pub struct PauliHamiltonian {
    spectral: Spectral,
    gauge: GaugeField,
    hbar: f64,
    a: VectorField,
}

impl PauliHamiltonian {
    pub fn new(gauge: &GaugeField, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
        }
        let grid = *gauge.grid();
        for a in 0..grid.dim() {
            if !grid.is_periodic(a) {
                return Err(Error::NonPeriodicAxis(a));
            }
        }
        Ok(Self {
            spectral: Spectral::new(&grid),
            gauge: gauge.clone(),
            hbar,
            a: gauge.a_total(),
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn gauge(&self) -> &GaugeField {
        &self.gauge
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `D_j psi` for one spinor component.
    fn covariant(&self, f: &[C64], j: usize) -> Vec<C64> {
        let a = self.a.component(j);
        let mut out = if j < self.spectral.grid().dim() {
            let mut d = self
                .spectral
                .derivative_complex(f, j)
                .expect("periodic axes checked");
            d.iter_mut().for_each(|v| *v *= self.hbar);
            d
        } else {
            vec![C64::new(0.0, 0.0); f.len()]
        };
        for ((o, &fv), &av) in out.iter_mut().zip(f).zip(a) {
            *o -= C64::new(0.0, av) * fv;
        }
        out
    }

    /// `[D_0 psi, D_1 psi, D_2 psi]` per spin component.
    pub fn covariant_derivatives(&self, psi: &SpinorField) -> [[Vec<C64>; 2]; 3] {
        [0, 1, 2].map(|j| [0, 1].map(|s| self.covariant(psi.component(s), j)))
    }

    pub fn apply(&self, psi: &SpinorField, v_sc: Option<&ScalarField>) -> Result<SpinorField> {
        let grid = *self.spectral.grid();
        grid.ensure_same(psi.grid())?;
        if let Some(v) = v_sc {
            grid.ensure_same(v.grid())?;
        }
        let n = grid.len();
        let mut out = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
        for s in 0..2 {
            for j in 0..3 {
                let dj = self.covariant(psi.component(s), j);
                let djj = self.covariant(&dj, j);
                for (o, v) in out[s].iter_mut().zip(djj) {
                    *o -= 0.5 * v;
                }
            }
        }
        let v_ext = self.gauge.v_ext().values();
        let b = self.gauge.b();
        let half_hbar = 0.5 * self.hbar;
        let (u, d) = (psi.component(0), psi.component(1));
        for i in 0..n {
            let v = v_ext[i] + v_sc.map_or(0.0, |f| f.values()[i]);
            let m = sigma_dot(b.at(i));
            let su = m[0][0] * u[i] + m[0][1] * d[i];
            let sd = m[1][0] * u[i] + m[1][1] * d[i];
            out[0][i] += v * u[i] - half_hbar * su;
            out[1][i] += v * d[i] - half_hbar * sd;
        }
        let [up, down] = out;
        SpinorField::new(grid, up, down)
    }

    /// Kinetic, Stern-Gerlach and external energies of one orbital.
    pub fn orbital_energies(&self, psi: &SpinorField) -> [f64; 3] {
        let grid = self.spectral.grid();
        let dv = grid.cell_volume();
        let mut kin = 0.0;
        for j in 0..3 {
            for s in 0..2 {
                kin += self
                    .covariant(psi.component(s), j)
                    .iter()
                    .map(|v| v.norm_sqr())
                    .sum::<f64>();
            }
        }
        kin *= 0.5 * dv;
        let (u, d) = (psi.component(0), psi.component(1));
        let b = self.gauge.b();
        let v_ext = self.gauge.v_ext().values();
        let (mut sg, mut ext) = (0.0, 0.0);
        for i in 0..grid.len() {
            let bi = b.at(i);
            let ud = u[i].conj() * d[i];
            let sx = 2.0 * ud.re;
            let sy = 2.0 * ud.im;
            let sz = u[i].norm_sqr() - d[i].norm_sqr();
            sg += bi[0] * sx + bi[1] * sy + bi[2] * sz;
            ext += v_ext[i] * (u[i].norm_sqr() + d[i].norm_sqr());
        }
        [kin, -0.5 * self.hbar * sg * dv, ext * dv]
    }

    /// Weighted kinetic, Stern-Gerlach and external energies of a state,
    /// reduced in orbital order.
    pub fn state_energies(&self, state: &MixedState) -> [f64; 3] {
        let parts: Vec<[f64; 3]> = state
            .orbitals()
            .par_iter()
            .map(|p| self.orbital_energies(p))
            .collect();
        let mut out = [0.0; 3];
        for (e, &w) in parts.iter().zip(state.weights()) {
            for c in 0..3 {
                out[c] += w * e[c];
            }
        }
        out
    }

    /// Pauli current with spin term `sign * hbar * curl(psi^* sigma psi)`.
    pub fn current(&self, state: &MixedState, spin_sign: f64) -> Result<VectorField> {
        let grid = *self.spectral.grid();
        grid.ensure_same(state.grid())?;
        let parts: Vec<([Vec<f64>; 3], [Vec<f64>; 3])> = state
            .orbitals()
            .par_iter()
            .map(|p| (self.convective_current_orbital(p), p.spin_density()))
            .collect();
        let n = grid.len();
        let mut conv = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut spin = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for ((c, s), &w) in parts.iter().zip(state.weights()) {
            for k in 0..3 {
                for i in 0..n {
                    conv[k][i] += w * c[k][i];
                    spin[k][i] += w * s[k][i];
                }
            }
        }
        let conv = VectorField::new(grid, conv)?;
        if spin_sign == 0.0 {
            return Ok(conv);
        }
        let curl = self.spectral.curl(&VectorField::new(grid, spin)?)?;
        conv.add(&curl.scaled(spin_sign * self.hbar))
    }

    /// `Im(conj(psi) D psi)` summed over spin components.
    pub fn convective_current_orbital(&self, psi: &SpinorField) -> [Vec<f64>; 3] {
        [0, 1, 2].map(|j| {
            let mut out = vec![0.0; psi.grid().len()];
            for s in 0..2 {
                let f = psi.component(s);
                let d = self.covariant(f, j);
                for i in 0..out.len() {
                    out[i] += (f[i].conj() * d[i]).im;
                }
            }
            out
        })
    }

    /// Convective part of the Pauli current.
    pub fn convective_current(&self, state: &MixedState) -> Result<VectorField> {
        self.current(state, 0.0)
    }
}

/// One-shot `H psi`.
pub fn apply_hamiltonian(
    psi: &SpinorField,
    gauge: &GaugeField,
    v_sc: &ScalarField,
    hbar: f64,
) -> Result<SpinorField> {
    PauliHamiltonian::new(gauge, hbar)?.apply(psi, Some(v_sc))
}

/// Mixed-state Pauli current with configurable spin-term sign.
pub fn pauli_current(
    state: &MixedState,
    gauge: &GaugeField,
    spin_sign: f64,
) -> Result<VectorField> {
    gauge.grid().ensure_same(state.grid())?;
    PauliHamiltonian::new(gauge, state.hbar())?.current(state, spin_sign)
}

/// Energy breakdown with field energy `1/2 int |grad V_sc|^2`.
pub fn energy(
    state: &MixedState,
    gauge: &GaugeField,
    v_sc: &ScalarField,
) -> Result<EnergyBreakdown> {
    gauge.grid().ensure_same(state.grid())?;
    gauge.grid().ensure_same(v_sc.grid())?;
    let h = PauliHamiltonian::new(gauge, state.hbar())?;
    let [kinetic, stern_gerlach, external] = h.state_energies(state);
    let grad = h.spectral().gradient(v_sc)?;
    let self_energy = 0.5 * grad.l2_norm().powi(2);
    Ok(EnergyBreakdown {
        kinetic,
        stern_gerlach,
        external,
        self_energy,
    })
}

/// `sum_j lambda_j <Psi_j, x Psi_j>`.
pub fn position_expectation(state: &MixedState) -> [f64; 3] {
    let grid = state.grid();
    let rho = crate::state::density(state);
    let dv = grid.cell_volume();
    let mut out = [0.0; 3];
    for (i, r) in rho.values().iter().enumerate() {
        let x = grid.position(i);
        for a in 0..3 {
            out[a] += x[a] * r * dv;
        }
    }
    out
}

/// `sum_j lambda_j <Psi_j, sigma Psi_j>`.
pub fn spin_expectation(state: &MixedState) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (s, &w) in state.spin_expectations().iter().zip(state.weights()) {
        for a in 0..3 {
            out[a] += w * s[a];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use std::f64::consts::PI;

    fn up() -> [C64; 2] {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    }

    #[test]
    fn plane_wave_eigenvalue() {
        let l = 4.0;
        let g = UniformGrid::cubic(2, 16, l).unwrap();
        let k = [2.0 * PI * 3.0 / l, -2.0 * PI / l];
        let hbar = 0.7;
        let phi: Vec<C64> = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1])
            })
            .collect();
        let psi = SpinorField::from_scalar(g, &phi, up()).unwrap();
        let h = PauliHamiltonian::new(&GaugeField::zero(g), hbar).unwrap();
        let hpsi = h.apply(&psi, None).unwrap();
        let e = 0.5 * hbar * hbar * (k[0] * k[0] + k[1] * k[1]);
        let diff = hpsi.sub(&psi.scaled(C64::new(e, 0.0))).unwrap();
        assert!(diff.norm() < 1e-10 * psi.norm() * e);
    }

    #[test]
    fn stern_gerlach_energy_spin_up() {
        let g = UniformGrid::cubic(2, 32, 8.0).unwrap();
        let gauge = GaugeField::uniform_b_landau(g, 0.8).unwrap();
        let mut psi = SpinorField::from_fn(g, |x| {
            [
                C64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0),
                C64::new(0.0, 0.0),
            ]
        });
        psi.scale(C64::new(1.0 / psi.norm(), 0.0));
        let hbar = 0.5;
        let st = MixedState::pure(psi, hbar).unwrap();
        let e = energy(&st, &gauge, &ScalarField::zeros(g)).unwrap();
        assert!((e.stern_gerlach + hbar * 0.8 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn real_orbital_has_no_convective_current() {
        let g = UniformGrid::cubic(2, 16, 6.0).unwrap();
        let mut psi = SpinorField::from_fn(g, |x| {
            [
                C64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp(), 0.0),
                C64::new(0.0, 0.0),
            ]
        });
        psi.scale(C64::new(1.0 / psi.norm(), 0.0));
        let st = MixedState::pure(psi, 1.0).unwrap();
        let j = pauli_current(&st, &GaugeField::zero(g), 0.0).unwrap();
        assert!(j.max_abs() < 1e-13);
    }
}
