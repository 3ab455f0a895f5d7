//! Time propagation of the mixed-state Pauli equation with self-consistent
//! Poisson, Hartree or X-alpha fields and optional magnetostatic coupling.

mod config;
mod propagate;
mod selfconsistent;
mod step;

pub use config::{Nonlinearity, Scheme, SolverConfig};
pub use propagate::{propagate, propagate_with, PauliSolver, StepReport, Trajectory};
pub use selfconsistent::SelfField;
pub use step::{rk4_stability_budget, stern_gerlach_rotation, StrangFactors};
