use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, C64};
use crate::gauge::GaugeField;
use crate::observables::PauliHamiltonian;
use crate::pauli::{mat_vec, Mat2, PauliMatrices};
use crate::spectral::Spectral;

/// `exp(+i (dt/2) sigma.B) = cos(t) I + i sin(t) sigma.n` with `t = dt |B| / 2`.
///
/// This is the Stern-Gerlach factor of `exp(-i dt H / hbar)`; the `hbar` of
/// the coupling cancels the propagator's `1/hbar`.
pub fn stern_gerlach_rotation(b: [f64; 3], dt: f64) -> Mat2 {
    let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if norm == 0.0 {
        return PauliMatrices::IDENTITY;
    }
    let theta = 0.5 * dt * norm;
    let (s, c) = theta.sin_cos();
    let n = [b[0] / norm, b[1] / norm, b[2] / norm];
    [
        [C64::new(c, s * n[2]), C64::new(s * n[1], s * n[0])],
        [C64::new(-s * n[1], s * n[0]), C64::new(c, -s * n[2])],
    ]
}

/// Precomputed factors of one Strang step for a fixed gauge, `hbar` and `dt`.
#[derive(Debug, Clone)]
pub struct StrangFactors {
    spectral: Spectral,
    hbar: f64,
    dt: f64,
    /// `V_ext + 1/2 sum_{j >= dim} A_j^2`.
    static_potential: Vec<f64>,
    /// Stern-Gerlach rotation over half a step; `None` when `B = 0`.
    spin: Option<Vec<Mat2>>,
    kinetic: Kinetic,
}

#[derive(Debug, Clone)]
enum Kinetic {
    /// `exp(-i dt hbar |k|^2 / 2)` in full Fourier space.
    Free(Vec<C64>),
    /// Symmetric sweep of per-axis magnetic factors in mixed representation.
    Sweep(Vec<(usize, Vec<C64>)>),
}

impl StrangFactors {
    pub fn new(gauge: &GaugeField, hbar: f64, dt: f64) -> Result<Self> {
        if !gauge.is_splitting_compatible() {
            return Err(Error::NonSplittingGauge);
        }
        let grid = *gauge.grid();
        let dim = grid.dim();
        let spectral = Spectral::new(&grid);
        let a = gauge.a_total();
        let mut static_potential = gauge.v_ext().values().to_vec();
        for j in dim..3 {
            for (v, aj) in static_potential.iter_mut().zip(a.component(j)) {
                *v += 0.5 * aj * aj;
            }
        }
        let spin = gauge.has_magnetic_field().then(|| {
            (0..grid.len())
                .map(|i| stern_gerlach_rotation(gauge.b().at(i), 0.5 * dt))
                .collect()
        });
        let kinetic = if !gauge.has_vector_potential() {
            let f = (0..grid.len())
                .map(|idx| C64::from_polar(1.0, -0.5 * dt * hbar * spectral.kd2(idx)))
                .collect();
            Kinetic::Free(f)
        } else {
            let shape = grid.shape();
            let mut order: Vec<(usize, f64)> = Vec::new();
            for j in 0..dim {
                order.push((j, if j + 1 == dim { dt } else { 0.5 * dt }));
            }
            for j in (0..dim.saturating_sub(1)).rev() {
                order.push((j, 0.5 * dt));
            }
            let sweep = order
                .into_iter()
                .map(|(j, tau)| {
                    let kd = spectral.kd(j);
                    let stride: usize = shape[j + 1..].iter().product();
                    let aj = a.component(j);
                    let f = (0..grid.len())
                        .map(|idx| {
                            let ia = (idx / stride) % shape[j];
                            let m = hbar * kd[ia] - aj[idx];
                            C64::from_polar(1.0, -0.5 * tau * m * m / hbar)
                        })
                        .collect();
                    (j, f)
                })
                .collect();
            Kinetic::Sweep(sweep)
        };
        Ok(Self {
            spectral,
            hbar,
            dt,
            static_potential,
            spin,
            kinetic,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Pointwise half step `exp(-i dt/(2 hbar) V)` composed with the spin rotation.
    pub fn half_potential(&self, psi: &mut SpinorField, v_sc: Option<&ScalarField>) {
        let c = -0.5 * self.dt / self.hbar;
        let vs = v_sc.map(|v| v.values());
        let (up, down) = psi.components_mut();
        for i in 0..up.len() {
            let v = self.static_potential[i] + vs.map_or(0.0, |s| s[i]);
            let ph = C64::from_polar(1.0, c * v);
            let mut w = [up[i] * ph, down[i] * ph];
            if let Some(rot) = &self.spin {
                w = mat_vec(&rot[i], w);
            }
            up[i] = w[0];
            down[i] = w[1];
        }
    }

    /// Full kinetic (and magnetic) step.
    pub fn kinetic(&self, psi: &mut SpinorField) {
        for s in 0..2 {
            let f = psi.component_mut(s);
            match &self.kinetic {
                Kinetic::Free(phase) => {
                    self.spectral.forward(f);
                    f.iter_mut().zip(phase).for_each(|(v, p)| *v *= p);
                    self.spectral.inverse(f);
                }
                Kinetic::Sweep(sweep) => {
                    for (j, phase) in sweep {
                        self.spectral.mixed_axis_apply(f, *j, |_, idx| phase[idx]);
                    }
                }
            }
        }
    }
}

/// Largest stable RK4 step `2.5 hbar / Lambda` for the spectral-radius bound
/// `Lambda = 1/2 sum_j (hbar k_max + max|A_j|)^2 + max|V| + hbar/2 max|B|`.
pub fn rk4_stability_budget(gauge: &GaugeField, v_sc_max: f64, hbar: f64) -> f64 {
    let grid = gauge.grid();
    let a = gauge.a_total();
    let mut lambda = 0.0;
    for j in 0..3 {
        let kmax = if j < grid.dim() {
            std::f64::consts::PI / grid.spacing(j)
        } else {
            0.0
        };
        let amax = a.component(j).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        lambda += 0.5 * (hbar * kmax + amax).powi(2);
    }
    lambda += gauge.v_ext().max_abs() + v_sc_max + 0.5 * hbar * gauge.max_abs_b();
    2.5 * hbar / lambda
}

/// One classical RK4 step of `i hbar dPsi/dt = H[rho] Psi` for all orbitals,
/// recomputing the self-consistent potential at every stage.
pub(crate) fn rk4_orbitals<F>(
    h: &PauliHamiltonian,
    orbitals: &[SpinorField],
    dt: f64,
    potential: F,
) -> Result<Vec<SpinorField>>
where
    F: Fn(&[SpinorField]) -> Option<ScalarField>,
{
    let factor = C64::new(0.0, -1.0 / h.hbar());
    let rhs = |psis: &[SpinorField]| -> Result<Vec<SpinorField>> {
        let v = potential(psis);
        psis.par_iter()
            .map(|p| {
                let mut hp = h.apply(p, v.as_ref())?;
                hp.scale(factor);
                Ok(hp)
            })
            .collect()
    };
    let stage = |k: &[SpinorField], c: f64| -> Result<Vec<SpinorField>> {
        orbitals
            .iter()
            .zip(k)
            .map(|(p, kk)| {
                let mut q = p.clone();
                q.axpy(C64::new(c, 0.0), kk)?;
                Ok(q)
            })
            .collect()
    };
    let k1 = rhs(orbitals)?;
    let k2 = rhs(&stage(&k1, 0.5 * dt)?)?;
    let k3 = rhs(&stage(&k2, 0.5 * dt)?)?;
    let k4 = rhs(&stage(&k3, dt)?)?;
    orbitals
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut q = p.clone();
            q.axpy(C64::new(dt / 6.0, 0.0), &k1[j])?;
            q.axpy(C64::new(dt / 3.0, 0.0), &k2[j])?;
            q.axpy(C64::new(dt / 3.0, 0.0), &k3[j])?;
            q.axpy(C64::new(dt / 6.0, 0.0), &k4[j])?;
            Ok(q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{adjoint, mat_mul};

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < tol))
    }

    #[test]
    fn rotation_is_unitary() {
        for b in [[0.3, -0.2, 1.1], [0.0, 0.0, 0.0], [5.0, 1.0, -2.0]] {
            let u = stern_gerlach_rotation(b, 0.37);
            assert!(close(
                &mat_mul(&u, &adjoint(&u)),
                &PauliMatrices::IDENTITY,
                1e-15
            ));
        }
    }

    #[test]
    fn spin_up_phase() {
        let (b0, dt) = (1.3, 0.2);
        let u = stern_gerlach_rotation([0.0, 0.0, b0], dt);
        let th = 0.5 * dt * b0;
        assert!((u[0][0] - C64::from_polar(1.0, th)).norm() < 1e-15);
        assert!((u[1][1] - C64::from_polar(1.0, -th)).norm() < 1e-15);
    }

    #[test]
    fn half_turn_squares_to_minus_identity() {
        let dt = 0.1;
        let b = [0.0, 3.0, 4.0];
        let scale = std::f64::consts::PI / dt / 5.0;
        let b = b.map(|v| v * scale);
        let u = stern_gerlach_rotation(b, dt);
        let n = [0.0, 0.6, 0.8];
        let expect = [
            [C64::new(0.0, n[2]), C64::new(n[1], n[0])],
            [C64::new(-n[1], n[0]), C64::new(0.0, -n[2])],
        ];
        assert!(close(&u, &expect, 1e-14));
        let minus = PauliMatrices::IDENTITY.map(|r| r.map(|v| -v));
        assert!(close(&mat_mul(&u, &u), &minus, 1e-14));
        let full = stern_gerlach_rotation(b.map(|v| 2.0 * v), dt);
        assert!(close(&full, &minus, 1e-14));
    }
}
