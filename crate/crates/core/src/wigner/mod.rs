//! Wigner matrices of mixed spinor states on a discrete phase space, their
//! moments, Husimi smoothing, the pseudo-differential operators of the
//! Pauli-Wigner equation and weak pairings against a fixed test basket.

mod basket;
mod grid;
mod husimi;
mod residual;
mod theta;
mod transform;

pub use basket::{hermite_he, pair_field, pair_state, pair_state_all, Basket, TestFunction};
pub use grid::{PhaseSpaceField, PhaseSpaceGrid};
pub use husimi::husimi;
pub use residual::{pauli_wigner_operator, pauli_wigner_residual, residual_along_trajectory};
pub use theta::{beta_apply, theta_apply, theta_apply_pauli, xi_derivative, Symbol};
pub use transform::{
    wigner_current_moment, wigner_density_moment, wigner_kinetic_current_moment,
    wigner_matrix_density, wigner_momentum_marginal, wigner_transform, wigner_transform_on,
    WignerMatrix,
};
