use std::f64::consts::PI;

use pauli_core::fields::PoissonConfig;
use pauli_core::initial::{gaussian_packet, SPIN_UP};
use pauli_core::observables::{position_expectation, spin_expectation};
use pauli_core::solver::rk4_stability_budget;
use pauli_core::{
    density, propagate, Error, GaugeField, MixedState, Nonlinearity, PauliSolver, Scheme,
    SolverConfig, UniformGrid, C64,
};

fn cfg(dt: f64, t_end: f64, scheme: Scheme) -> SolverConfig {
    SolverConfig {
        dt,
        t_end,
        scheme,
        ..SolverConfig::default()
    }
}

fn second_moment(state: &MixedState, axis: usize) -> f64 {
    let g = state.grid();
    let rho = density(state);
    let mean = position_expectation(state)[axis];
    rho.values()
        .iter()
        .enumerate()
        .map(|(i, r)| (g.position(i)[axis] - mean).powi(2) * r)
        .sum::<f64>()
        * g.cell_volume()
}

#[test]
fn free_packet_spreads_like_the_exact_solution() {
    let g = UniformGrid::cubic(1, 256, 40.0).unwrap();
    let (s0, hbar, t) = (0.7, 0.5, 2.0);
    let psi =
        gaussian_packet(&g, [0.0; 3], [0.4, 0.0, 0.0], [s0, 1.0, 1.0], hbar, SPIN_UP).unwrap();
    let state = MixedState::pure(psi, hbar).unwrap();
    let traj = propagate(
        &state,
        &GaugeField::zero(g),
        &cfg(0.05, t, Scheme::StrangSplit),
    )
    .unwrap();
    let var = second_moment(&traj.final_state, 0);
    let exact = s0 * s0 + (hbar * t / (2.0 * s0)).powi(2);
    assert!((var - exact).abs() < 1e-9, "{var} vs {exact}");
    let x = position_expectation(&traj.final_state)[0];
    assert!((x - 0.4 * t).abs() < 1e-9);
}

#[test]
fn larmor_precession_in_uniform_field() {
    let g = UniformGrid::cubic(2, 32, 8.0).unwrap();
    let b0 = 1.5;
    let hbar = 0.5;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let chi = [C64::new(s, 0.0), C64::new(s, 0.0)];
    let psi = gaussian_packet(&g, [0.0; 3], [0.0; 3], [0.8, 0.8, 1.0], hbar, chi).unwrap();
    let state = MixedState::pure(psi, hbar).unwrap();
    let gauge = GaugeField::uniform_b_landau(g, b0).unwrap();
    let t = 1.0;
    for scheme in [Scheme::StrangSplit, Scheme::Rk4Pseudospectral] {
        let dt = if scheme == Scheme::StrangSplit {
            0.02
        } else {
            0.005
        };
        let traj = propagate(&state, &gauge, &cfg(dt, t, scheme)).unwrap();
        let sp = spin_expectation(&traj.final_state);
        assert!((sp[0] - (b0 * t).cos()).abs() < 1e-6, "{scheme:?} {sp:?}");
        assert!((sp[1] + (b0 * t).sin()).abs() < 1e-6, "{scheme:?} {sp:?}");
        assert!(sp[2].abs() < 1e-8, "{scheme:?} {sp:?}");
    }
}

#[test]
fn cyclotron_orbit_follows_the_classical_circle() {
    let g = UniformGrid::cubic(2, 64, 12.0).unwrap();
    let (b0, hbar) = (1.0, 0.5);
    let gauge = GaugeField::uniform_b_landau(g, b0).unwrap();
    // Canonical momentum p = v + A with A_x = -b0 y; the packet starts at y = 1.
    let psi = gaussian_packet(
        &g,
        [0.0, 1.0, 0.0],
        [1.0 - b0, 0.0, 0.0],
        [0.5, 0.5, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap();
    let state = MixedState::pure(psi, hbar).unwrap();
    let t = PI / 2.0;
    let traj = propagate(&state, &gauge, &cfg(PI / 400.0, t, Scheme::StrangSplit)).unwrap();
    // v(0) = (1, 0), dv/dt = v x B: x(t) = sin t, y(t) = cos t.
    let x = position_expectation(&traj.final_state);
    assert!((x[0] - t.sin()).abs() < 2e-3, "{x:?}");
    assert!((x[1] - t.cos()).abs() < 2e-3, "{x:?}");
    let e: Vec<f64> = traj.reports.iter().map(|r| r.total_energy()).collect();
    let drift = e.iter().fold(0.0f64, |m, v| m.max((v - e[0]).abs()));
    assert!(drift < 1e-3 * e[0].abs(), "{drift}");
    for r in &traj.reports {
        assert!((r.mass - 1.0).abs() < 1e-12);
    }
}

fn two_stream_state(g: UniformGrid, hbar: f64) -> MixedState {
    let a = gaussian_packet(
        &g,
        [-1.0, 0.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.6, 1.0, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap();
    let b = gaussian_packet(
        &g,
        [1.0, 0.0, 0.0],
        [-0.5, 0.0, 0.0],
        [0.6, 1.0, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap();
    // Orthogonalize b against a.
    let ov = a.inner(&b).unwrap();
    let mut b = b;
    b.axpy(-ov, &a).unwrap();
    let n = b.norm();
    b.scale(C64::new(1.0 / n, 0.0));
    MixedState::new(vec![a, b], vec![0.6, 0.4], hbar).unwrap()
}

#[test]
fn strang_and_rk4_agree_for_self_consistent_poisson() {
    let g = UniformGrid::cubic(1, 128, 16.0).unwrap();
    let hbar = 0.4;
    let state = two_stream_state(g, hbar);
    let nl = Nonlinearity::Poisson(PoissonConfig::periodic(1.0));
    let gauge = GaugeField::zero(g);
    let t = 1.0;
    let run = |scheme, dt| {
        let c = SolverConfig {
            nonlinearity: nl.clone(),
            ..cfg(dt, t, scheme)
        };
        propagate(&state, &gauge, &c).unwrap()
    };
    let coarse = run(Scheme::StrangSplit, 0.02);
    let fine = run(Scheme::StrangSplit, 0.01);
    let rk = run(Scheme::Rk4Pseudospectral, 0.002);
    let diff = |a: &MixedState, b: &MixedState| {
        let ra = density(a);
        let rb = density(b);
        ra.values()
            .iter()
            .zip(rb.values())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
            * g.cell_volume().sqrt()
    };
    let e_coarse = diff(&coarse.final_state, &rk.final_state);
    let e_fine = diff(&fine.final_state, &rk.final_state);
    assert!(e_fine < 1e-4, "{e_fine}");
    let ratio = e_coarse / e_fine;
    assert!(ratio > 3.0 && ratio < 5.0, "order ratio {ratio}");
    for traj in [&fine, &rk] {
        let e0 = traj.reports[0].total_energy();
        for r in &traj.reports {
            assert!((r.mass - 1.0).abs() < 1e-10);
            assert!((r.total_energy() - e0).abs() < 1e-3 * e0.abs());
        }
    }
}

#[test]
fn rk4_rejects_unstable_steps() {
    let g = UniformGrid::cubic(1, 128, 8.0).unwrap();
    let psi = gaussian_packet(&g, [0.0; 3], [0.0; 3], [0.5, 1.0, 1.0], 0.5, SPIN_UP).unwrap();
    let state = MixedState::pure(psi, 0.5).unwrap();
    let gauge = GaugeField::zero(g);
    let budget = rk4_stability_budget(&gauge, 0.0, 0.5);
    let err = PauliSolver::new(
        &state,
        &gauge,
        &cfg(2.0 * budget, 1.0, Scheme::Rk4Pseudospectral),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Stability { .. }));
    assert!(PauliSolver::new(
        &state,
        &gauge,
        &cfg(0.9 * budget, 1.0, Scheme::Rk4Pseudospectral)
    )
    .is_ok());
}

#[test]
fn snapshots_follow_the_stride() {
    let g = UniformGrid::cubic(1, 64, 8.0).unwrap();
    let psi = gaussian_packet(&g, [0.0; 3], [0.0; 3], [0.5, 1.0, 1.0], 0.5, SPIN_UP).unwrap();
    let state = MixedState::pure(psi, 0.5).unwrap();
    let c = SolverConfig {
        snapshot_stride: 5,
        report_stride: 3,
        ..cfg(0.1, 2.0, Scheme::StrangSplit)
    };
    let traj = propagate(&state, &GaugeField::zero(g), &c).unwrap();
    assert_eq!(traj.snapshots.len(), 5);
    assert_eq!(traj.reports.len(), 8);
    assert_eq!(traj.reports.last().unwrap().step, 20);
}
