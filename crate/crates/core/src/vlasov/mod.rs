//! Semi-Lagrangian reference solver for the Vlasov equation with Lorentz
//! force, optionally coupled to periodic Poisson, on 1d1v and 2d2v phase
//! spaces.

mod density;
mod solver;
mod spline;

pub use density::{moments, PhaseSpaceDensity, VlasovGrid, VLASOV_POINT_BUDGET};
pub use solver::{
    vlasov_poisson_propagate, vlasov_propagate_with, LorentzFields, VlasovConfig, VlasovReport,
    VlasovSolver, VlasovTrajectory,
};
