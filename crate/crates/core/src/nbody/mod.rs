//! Small-N tensor-grid propagation with pair interactions, reduced density
//! matrices and the mean-field comparison against a Hartree reference.

mod rdm;
mod study;
mod wavefunction;

pub use rdm::{
    reduced_density_matrix, trace_distance, trace_distance_matrices, ReducedDensityMatrix,
    MAX_RDM_DIM,
};
pub use study::{
    crank_nicolson, dense_hamiltonian, hartree_reference, meanfield_study, monotone_in_n,
    MeanFieldConfig, MeanFieldRow,
};
pub use wavefunction::{
    InitialKind, NBodyHamiltonian, NBodyPropagator, NBodyWavefunction, Orbital, MAX_PARTICLES,
    MAX_POINTS, NBODY_AMPLITUDE_BUDGET,
};
