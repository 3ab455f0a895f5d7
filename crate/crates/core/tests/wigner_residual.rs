use pauli_core::initial::{gaussian_packet, SPIN_UP};
use pauli_core::wigner::{
    pauli_wigner_residual, residual_along_trajectory, wigner_transform, WignerMatrix,
};
use pauli_core::{GaugeField, MixedState, Scheme, SolverConfig, UniformGrid};

fn cfg(dt: f64) -> SolverConfig {
    SolverConfig {
        dt,
        t_end: 1.0,
        scheme: Scheme::StrangSplit,
        ..SolverConfig::default()
    }
}

fn ratio(state: &MixedState, gauge: &GaugeField, dt: f64, t: f64) -> (f64, f64) {
    let r1 = residual_along_trajectory(state, gauge, &cfg(dt), t).unwrap();
    let r2 = residual_along_trajectory(state, gauge, &cfg(dt / 2.0), t).unwrap();
    (r1, r2)
}

#[test]
fn zero_wigner_matrix_has_zero_residual() {
    let g = UniformGrid::cubic(1, 32, 8.0).unwrap();
    let gauge = GaugeField::zero(g);
    let state = MixedState::pure(
        gaussian_packet(&g, [0.0; 3], [0.0; 3], [0.6, 1.0, 1.0], 0.5, SPIN_UP).unwrap(),
        0.5,
    )
    .unwrap();
    let z = WignerMatrix::zeros(*wigner_transform(&state).unwrap().grid());
    assert_eq!(pauli_wigner_residual(&z, None, &gauge, &z).unwrap(), 0.0);
}

#[test]
fn free_residual_is_second_order_in_dt() {
    let g = UniformGrid::cubic(1, 128, 16.0).unwrap();
    let hbar = 0.5;
    let psi = gaussian_packet(
        &g,
        [-0.5, 0.0, 0.0],
        [0.8, 0.0, 0.0],
        [0.6, 1.0, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap();
    let state = MixedState::pure(psi, hbar).unwrap();
    let (r1, r2) = ratio(&state, &GaugeField::zero(g), 0.1, 0.4);
    assert!((r1 / r2 - 4.0).abs() < 0.8, "{r1} {r2} ratio {}", r1 / r2);
}

#[test]
fn uniform_field_residual_is_second_order_in_dt() {
    let g = UniformGrid::cubic(2, 32, 12.0).unwrap();
    let hbar = 1.0;
    let psi = gaussian_packet(
        &g,
        [0.3, 0.0, 0.0],
        [0.3, -0.2, 0.0],
        [0.6, 0.6, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap();
    let state = MixedState::pure(psi, hbar).unwrap();
    let gauge = GaugeField::uniform_b_landau(g, 0.5).unwrap();
    let (r1, r2) = ratio(&state, &gauge, 0.1, 0.4);
    assert!((r1 / r2 - 4.0).abs() < 0.8, "{r1} {r2} ratio {}", r1 / r2);
}
