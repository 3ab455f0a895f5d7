//! Fixtures shared by the criterion benches.

use pauli_core::fields::PoissonConfig;
use pauli_core::initial::{gaussian_packet, SPIN_UP};
use pauli_core::vlasov::{PhaseSpaceDensity, VlasovGrid};
use pauli_core::{GaugeField, MixedState, Nonlinearity, Result, SolverConfig, UniformGrid};

/// Normalized Gaussian packet on an `n^dim` grid of side 16.
pub fn packet_state(dim: usize, n: usize, hbar: f64) -> Result<MixedState> {
    let grid = UniformGrid::cubic(dim, n, 16.0)?;
    let psi = gaussian_packet(&grid, [0.0; 3], [1.0, 0.5, 0.0], [1.0; 3], hbar, SPIN_UP)?;
    MixedState::pure(psi, hbar)
}

pub fn poisson_config(dt: f64) -> SolverConfig {
    SolverConfig {
        dt,
        nonlinearity: Nonlinearity::Poisson(PoissonConfig::periodic(1.0)),
        ..SolverConfig::default()
    }
}

pub fn uniform_b(grid: &UniformGrid) -> Result<GaugeField> {
    GaugeField::uniform_b_symmetric(*grid, 1.0)
}

/// Maxwellian blob on an `n^dim x n^dim` phase-space grid.
pub fn blob(dim: usize, n: usize) -> Result<PhaseSpaceDensity> {
    let x = UniformGrid::cubic(dim, n, 10.0)?;
    let p = UniformGrid::cubic(dim, n, 12.0)?;
    let grid = VlasovGrid::new(x, p)?;
    Ok(PhaseSpaceDensity::from_fn(grid, |x, p| {
        let r2: f64 = (0..dim).map(|a| x[a] * x[a] + p[a] * p[a]).sum();
        (-r2).exp()
    }))
}
