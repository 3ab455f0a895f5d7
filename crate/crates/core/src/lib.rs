//! Mixed-state Pauli-Poisson simulation: spectral solvers for spin-1/2
//! quantum dynamics with self-consistent fields, Wigner phase-space
//! diagnostics, a Vlasov-Lorentz-Poisson reference solver and a small-N
//! many-body solver.

pub mod error;
pub mod fft;
pub mod field;
pub mod fields;
pub mod gauge;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod io;
pub mod nbody;
pub mod observables;
pub mod pauli;
pub mod solver;
pub mod spectral;
pub mod state;
pub mod vlasov;
pub mod wigner;

pub use error::{Error, Result};
pub use field::{ScalarField, SpinorField, VectorField, C64};
pub use gauge::GaugeField;
pub use grid::UniformGrid;
pub use observables::{
    apply_hamiltonian, energy, pauli_current, EnergyBreakdown, PauliHamiltonian,
};
pub use pauli::PauliMatrices;
pub use solver::{
    propagate, Nonlinearity, PauliSolver, Scheme, SolverConfig, StepReport, Trajectory,
};
pub use state::{density, MixedState};
