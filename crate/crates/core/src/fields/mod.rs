//! Self-consistent and external fields: Poisson and Hartree potentials,
//! local exchange, gauge presets and the magnetostatic (Poisswell) update.

pub(crate) mod hartree;
mod poisson;
mod poisswell;
mod presets;

pub use hartree::{
    hartree_potential, xalpha_energy, xalpha_potential, HartreeOperator, InteractionKernel,
};
pub use poisson::{solve_poisson, PoissonConfig, PoissonMode, PoissonSolver};
pub use poisswell::{poisswell_update, PoisswellConfig, PoisswellOutcome};
pub use presets::{gauge_preset, GaugePreset};
