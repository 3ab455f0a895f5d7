use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rdm::{reduced_density_matrix, trace_distance, ReducedDensityMatrix, MAX_RDM_DIM};
use super::wavefunction::{
    InitialKind, NBodyHamiltonian, NBodyPropagator, NBodyWavefunction, Orbital,
};
use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, C64};
use crate::fields::InteractionKernel;
use crate::gauge::GaugeField;
use crate::grid::UniformGrid;
use crate::initial::SPIN_UP;
use crate::solver::{Nonlinearity, PauliSolver, Scheme, SolverConfig};
use crate::state::MixedState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldConfig {
    pub hbar: f64,
    pub n_list: Vec<usize>,
    pub sample_times: Vec<f64>,
    pub dt: f64,
    pub kernel: Option<InteractionKernel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldRow {
    pub n: usize,
    pub t: f64,
    pub trace_distance: f64,
    pub coupling: f64,
    pub grid: usize,
}

impl MeanFieldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.iter().any(|n| !(2..=4).contains(n)) {
            return Err(Error::Config(
                "particle counts must lie in {2, 3, 4}".into(),
            ));
        }
        if !(self.dt > 0.0 && self.hbar > 0.0) {
            return Err(Error::Config("dt and hbar must be positive".into()));
        }
        for &t in &self.sample_times {
            let steps = t / self.dt;
            if !(t >= 0.0) || (steps - steps.round()).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "sample time {t} is not a multiple of dt = {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }

    fn sample_steps(&self) -> Vec<usize> {
        self.sample_times
            .iter()
            .map(|t| (t / self.dt).round() as usize)
            .collect()
    }

    fn coupling(&self) -> f64 {
        match &self.kernel {
            Some(InteractionKernel::SoftenedCoulomb { lambda, .. })
            | Some(InteractionKernel::Coulomb3d { lambda }) => *lambda,
            _ => 0.0,
        }
    }
}

/// One-body Hartree reference `i hbar dpsi/dt = (-hbar^2/2 d^2 + V + W * |psi|^2) psi`,
/// sampled at the configured times.
pub fn hartree_reference(
    grid: UniformGrid,
    psi: &Orbital,
    v_ext: Option<&[f64]>,
    cfg: &MeanFieldConfig,
) -> Result<Vec<Orbital>> {
    let spinor = SpinorField::from_scalar(grid, psi, SPIN_UP)?;
    let state = MixedState::pure(spinor.scaled(C64::new(1.0 / spinor.norm(), 0.0)), cfg.hbar)?;
    let mut gauge = GaugeField::zero(grid);
    if let Some(v) = v_ext {
        gauge = gauge.with_v_ext(ScalarField::new(grid, v.to_vec())?)?;
    }
    let nonlinearity = match &cfg.kernel {
        Some(k) => Nonlinearity::Hartree { kernel: k.clone() },
        None => Nonlinearity::None,
    };
    let steps = cfg.sample_steps();
    let last = steps.iter().copied().max().unwrap_or(0);
    let scfg = SolverConfig {
        dt: cfg.dt,
        t_end: last as f64 * cfg.dt,
        scheme: Scheme::StrangSplit,
        nonlinearity,
        ..SolverConfig::default()
    };
    let mut solver = PauliSolver::new(&state, &gauge, &scfg)?;
    let mut s = state;
    let mut out = vec![Vec::new(); steps.len()];
    for n in 0..=last {
        if n > 0 {
            solver.step(&mut s)?;
        }
        for (j, &k) in steps.iter().enumerate() {
            if k == n {
                out[j] = s.orbitals()[0].component(0).to_vec();
            }
        }
    }
    Ok(out)
}

/// Trace distance between the one-particle marginal of the N-body product
/// evolution and the Hartree orbital, for every `N` and sample time.
pub fn meanfield_study(
    grid: UniformGrid,
    psi: &Orbital,
    v_ext: Option<&[f64]>,
    cfg: &MeanFieldConfig,
) -> Result<Vec<MeanFieldRow>> {
    cfg.validate()?;
    let reference = hartree_reference(grid, psi, v_ext, cfg)?;
    let refs: Vec<ReducedDensityMatrix> = reference
        .iter()
        .map(|o| ReducedDensityMatrix::pure_product(o, 1, grid, false))
        .collect::<Result<_>>()?;
    let steps = cfg.sample_steps();
    let last = steps.iter().copied().max().unwrap_or(0);
    let h = NBodyHamiltonian {
        hbar: cfg.hbar,
        v_ext: v_ext.map(|v| v.to_vec()),
        kernel: cfg.kernel.clone(),
        b: [0.0; 3],
    };
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let prop = NBodyPropagator::new(n, grid, false, &h, cfg.dt)?;
        let mut state = NBodyWavefunction::build(
            InitialKind::HartreeProduct,
            n,
            grid,
            false,
            std::slice::from_ref(psi),
        )?;
        for k in 0..=last {
            if k > 0 {
                prop.step(&mut state)?;
            }
            for (j, &s) in steps.iter().enumerate() {
                if s == k {
                    let rho = reduced_density_matrix(&state, 1)?;
                    rows.push(MeanFieldRow {
                        n,
                        t: cfg.sample_times[j],
                        trace_distance: trace_distance(&rho, &refs[j])?,
                        coupling: cfg.coupling(),
                        grid: grid.points(0),
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// True when, at every sampled time, the distance does not increase with `N`
/// (up to `tol`).
pub fn monotone_in_n(rows: &[MeanFieldRow], tol: f64) -> bool {
    let mut times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.iter().all(|&t| {
        let mut at: Vec<&MeanFieldRow> = rows.iter().filter(|r| r.t == t).collect();
        at.sort_by_key(|r| r.n);
        at.windows(2)
            .all(|w| w[1].trace_distance <= w[0].trace_distance + tol)
    })
}

/// Dense N-body Hamiltonian (no spin) with the spectral kinetic operator, for
/// oracle checks on small grids.
pub fn dense_hamiltonian(
    n_particles: usize,
    grid: UniformGrid,
    h: &NBodyHamiltonian,
) -> Result<DMatrix<C64>> {
    let n = grid.points(0);
    let dim = n.pow(n_particles as u32);
    if dim > MAX_RDM_DIM {
        return Err(Error::Budget {
            requested: dim as u128,
            budget: MAX_RDM_DIM as u128,
        });
    }
    let k = grid.derivative_wavenumbers(0);
    // One-particle kinetic matrix F^-1 diag(hbar^2 k^2 / 2) F.
    let t1 = DMatrix::from_fn(n, n, |i, j| {
        let s: C64 = (0..n)
            .map(|q| {
                let phase =
                    2.0 * std::f64::consts::PI * (q as f64) * (i as f64 - j as f64) / n as f64;
                C64::from_polar(0.5 * h.hbar * h.hbar * k[q] * k[q], phase)
            })
            .sum();
        s / n as f64
    });
    let u = h.potential_table(&grid, n_particles)?;
    let mut out = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        u.iter().map(|&v| C64::new(v, 0.0)),
    ));
    for p in 0..n_particles {
        let stride = n.pow((n_particles - 1 - p) as u32);
        for row in 0..dim {
            let qi = (row / stride) % n;
            let base = row - qi * stride;
            for qj in 0..n {
                out[(row, base + qj * stride)] += t1[(qi, qj)];
            }
        }
    }
    Ok(out)
}

/// `steps` Crank-Nicolson steps of `i hbar dpsi/dt = H psi`.
pub fn crank_nicolson(
    h: &DMatrix<C64>,
    hbar: f64,
    dt: f64,
    steps: usize,
    psi: &[C64],
) -> Result<Vec<C64>> {
    let dim = h.nrows();
    if psi.len() != dim {
        return Err(Error::GridMismatch);
    }
    let a = C64::new(0.0, 0.5 * dt / hbar);
    let id = DMatrix::<C64>::identity(dim, dim);
    let lhs = (&id + h * a).lu();
    let rhs = &id - h * a;
    let mut v = DVector::from_column_slice(psi);
    for _ in 0..steps {
        let b = &rhs * &v;
        v = lhs
            .solve(&b)
            .ok_or_else(|| Error::Numerical("singular Crank-Nicolson matrix".into()))?;
    }
    Ok(v.iter().copied().collect())
}
