use std::f64::consts::PI;

use pauli_core::initial::{gaussian_packet, SPIN_DOWN, SPIN_UP};
use pauli_core::wigner::{
    husimi, pair_field, pair_state, theta_apply, wigner_current_moment, wigner_density_moment,
    wigner_kinetic_current_moment, wigner_momentum_marginal, wigner_transform, Basket,
    PhaseSpaceField, PhaseSpaceGrid, Symbol, WignerMatrix,
};
use pauli_core::{
    density, GaugeField, MixedState, PauliHamiltonian, PauliMatrices, ScalarField, SpinorField,
    UniformGrid, C64,
};

fn packet_1d(g: &UniformGrid, x0: f64, p0: f64, s: f64, hbar: f64) -> SpinorField {
    gaussian_packet(
        g,
        [x0, 0.0, 0.0],
        [p0, 0.0, 0.0],
        [s, 1.0, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap()
}

#[test]
fn gaussian_matches_the_analytic_wigner_function() {
    let g = UniformGrid::cubic(1, 256, 24.0).unwrap();
    let (x0, p0, s, hbar) = (0.5, 0.7, 0.6, 0.5);
    let state = MixedState::pure(packet_1d(&g, x0, p0, s, hbar), hbar).unwrap();
    let w = wigner_transform(&state).unwrap();
    let pg = *w.grid();
    let exact = PhaseSpaceField::from_fn(pg, |x, xi| {
        (-(x[0] - x0).powi(2) / (2.0 * s * s) - 2.0 * s * s * (xi[0] - p0).powi(2) / (hbar * hbar))
            .exp()
            / (PI * hbar)
    });
    let f = w.trace();
    let err = f
        .values()
        .iter()
        .zip(exact.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-8, "max error {err}");
    for c in [(0, 1), (1, 0), (1, 1)] {
        assert!(w.component(c.0, c.1).iter().all(|v| v.norm() < 1e-14));
    }
    assert!(f.min() > -1e-12);
    assert!((f.integral() - 1.0).abs() < 1e-10);
}

#[test]
fn marginals_hermiticity_and_parseval() {
    let g = UniformGrid::cubic(1, 128, 16.0).unwrap();
    let hbar = 0.4;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = gaussian_packet(
        &g,
        [-1.0, 0.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.7, 1.0, 1.0],
        hbar,
        [C64::new(s, 0.0), C64::new(0.0, s)],
    )
    .unwrap();
    let mut b = gaussian_packet(
        &g,
        [1.5, 0.0, 0.0],
        [-0.3, 0.0, 0.0],
        [0.5, 1.0, 1.0],
        hbar,
        SPIN_DOWN,
    )
    .unwrap();
    let ov = a.inner(&b).unwrap();
    b.axpy(-ov, &a).unwrap();
    let n = b.norm();
    b.scale(C64::new(1.0 / n, 0.0));
    let state = MixedState::new(vec![a, b], vec![0.7, 0.3], hbar).unwrap();
    let w = wigner_transform(&state).unwrap();
    assert!(w.hermiticity_error() < 1e-12 * w.max_abs().max(1.0));
    assert!(w.max_trace_imag() < 1e-12);

    let rho = density(&state);
    let m = wigner_density_moment(&w);
    let err = rho
        .values()
        .iter()
        .zip(m.values())
        .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
    assert!(err < 1e-10, "density marginal {err}");

    // Parseval: ||f||^2 = (2 pi hbar)^-1 ||rho||_HS^2.
    let dv = g.cell_volume();
    let mut hs = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            let k: C64 = (0..2).map(|c| state.kernel(c, c, i, j)).sum();
            hs += k.norm_sqr();
        }
    }
    hs *= dv * dv;
    let f2 = w.trace().l2_norm().powi(2);
    assert!(
        (f2 - hs / (2.0 * PI * hbar)).abs() < 1e-8,
        "{f2} vs {}",
        hs / (2.0 * PI * hbar)
    );
}

#[test]
fn momentum_marginal_is_the_momentum_density() {
    let g = UniformGrid::cubic(1, 128, 16.0).unwrap();
    let (x0, p0, s, hbar) = (-0.5, 0.8, 0.6, 0.5);
    let state = MixedState::pure(packet_1d(&g, x0, p0, s, hbar), hbar).unwrap();
    let w = wigner_transform(&state).unwrap();
    let sp = hbar / (2.0 * s);
    let marg = wigner_momentum_marginal(&w);
    for (k, v) in marg.iter().enumerate() {
        let xi = w.grid().xi(0, k);
        let exact = (-(xi - p0).powi(2) / (2.0 * sp * sp)).exp() / ((2.0 * PI).sqrt() * sp);
        assert!((v - exact).abs() < 1e-8, "xi = {xi}: {v} vs {exact}");
    }
}

#[test]
fn current_moment_matches_the_convective_current() {
    let g = UniformGrid::cubic(1, 256, 24.0).unwrap();
    let (p0, hbar) = (0.9, 0.5);
    let state = MixedState::pure(packet_1d(&g, 0.3, p0, 0.6, hbar), hbar).unwrap();
    let w = wigner_transform(&state).unwrap();
    let j = wigner_current_moment(&w);
    let h = PauliHamiltonian::new(&GaugeField::zero(g), hbar).unwrap();
    let jc = h.convective_current(&state).unwrap();
    let rho = density(&state);
    for i in 0..g.len() {
        assert!((j.component(0)[i] - jc.component(0)[i]).abs() < 1e-8);
        assert!((j.component(0)[i] - p0 * rho.values()[i]).abs() < 1e-8);
    }

    let real = MixedState::pure(packet_1d(&g, 0.3, 0.0, 0.6, hbar), hbar).unwrap();
    let j0 = wigner_current_moment(&wigner_transform(&real).unwrap());
    assert!(j0.max_abs() < 1e-12);
}

#[test]
fn kinetic_current_moment_in_a_magnetic_field() {
    let g = UniformGrid::cubic(2, 32, 12.0).unwrap();
    let hbar = 1.0;
    let psi = gaussian_packet(
        &g,
        [0.2, -0.1, 0.0],
        [0.4, -0.2, 0.0],
        [0.5, 0.5, 1.0],
        hbar,
        SPIN_UP,
    )
    .unwrap();
    let state = MixedState::pure(psi, hbar).unwrap();
    let gauge = GaugeField::uniform_b_landau(g, 0.2).unwrap();
    let w = wigner_transform(&state).unwrap();
    let j = wigner_kinetic_current_moment(&w, &gauge).unwrap();
    let jc = PauliHamiltonian::new(&gauge, hbar)
        .unwrap()
        .convective_current(&state)
        .unwrap();
    let err = j.sub(&jc).unwrap().max_abs();
    assert!(err < 1e-8, "{err}");
}

#[test]
fn cat_state_fringes_follow_the_two_packet_formula() {
    let g = UniformGrid::cubic(1, 256, 24.0).unwrap();
    let (a, s, hbar) = (2.0, 0.5, 0.5);
    let phi: Vec<C64> = (0..g.len())
        .map(|i| {
            let x = g.coord(0, i);
            C64::new(
                (-(x - a).powi(2) / (4.0 * s * s)).exp() + (-(x + a).powi(2) / (4.0 * s * s)).exp(),
                0.0,
            )
        })
        .collect();
    let mut psi = SpinorField::from_scalar(g, &phi, SPIN_UP).unwrap();
    let n2 = psi.norm_sq();
    psi.scale(C64::new(1.0 / n2.sqrt(), 0.0));
    let state = MixedState::pure(psi, hbar).unwrap();
    let w = wigner_transform(&state).unwrap();
    // Unnormalized packets have norm^2 sqrt(2 pi) s each.
    let c = (2.0 * PI).sqrt() * s / n2;
    let exact = PhaseSpaceField::from_fn(*w.grid(), |x, xi| {
        let gx = |x0: f64| (-(x[0] - x0).powi(2) / (2.0 * s * s)).exp();
        let gp = (-2.0 * s * s * xi[0] * xi[0] / (hbar * hbar)).exp() / (PI * hbar);
        c * gp * (gx(a) + gx(-a) + 2.0 * gx(0.0) * (2.0 * a * xi[0] / hbar).cos())
    });
    let f = w.trace();
    let err = f
        .values()
        .iter()
        .zip(exact.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-8, "{err}");
    assert!((f.integral() - 1.0).abs() < 1e-10);
    assert!(f.min() < -0.1, "fringes must go negative");

    let h = husimi(&w);
    assert!(h.min() > -1e-12, "husimi min {}", h.min());
    assert!((h.integral() - f.integral()).abs() < 1e-8);
}

#[test]
fn husimi_of_a_gaussian_is_a_wider_gaussian() {
    let g = UniformGrid::cubic(1, 128, 16.0).unwrap();
    let (s, hbar) = (0.6, 0.5);
    let state = MixedState::pure(packet_1d(&g, 0.0, 0.0, s, hbar), hbar).unwrap();
    let h = husimi(&wigner_transform(&state).unwrap());
    let vx = s * s + 0.5 * hbar;
    let vp = hbar * hbar / (4.0 * s * s) + 0.5 * hbar;
    let exact = PhaseSpaceField::from_fn(*h.grid(), |x, xi| {
        (-x[0] * x[0] / (2.0 * vx) - xi[0] * xi[0] / (2.0 * vp)).exp()
            / (2.0 * PI * (vx * vp).sqrt())
    });
    let err = h
        .values()
        .iter()
        .zip(exact.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-8, "{err}");
    let zero = WignerMatrix::zeros(*h.grid());
    assert_eq!(husimi(&zero).max_abs(), 0.0);
}

fn gaussian_symbol_field(pg: PhaseSpaceGrid, w: f64) -> PhaseSpaceField {
    PhaseSpaceField::from_fn(pg, |x, xi| {
        (-0.5 * x[0] * x[0] - 0.5 * (xi[0] - 0.1) * (xi[0] - 0.1) / (w * w)).exp()
    })
}

#[test]
fn theta_of_linear_symbol_is_a_momentum_derivative() {
    let g = UniformGrid::cubic(1, 64, 8.0).unwrap();
    let pg = PhaseSpaceGrid::new(g, 0.3).unwrap();
    let w = 0.5;
    let phi = WignerMatrix::from_scalar(&gaussian_symbol_field(pg, w), PauliMatrices::IDENTITY);
    let a = 1.7;
    let th = theta_apply(&Symbol::linear([a, 0.0, 0.0]), &phi).unwrap();
    let exact = PhaseSpaceField::from_fn(pg, |x, xi| {
        let d = -(xi[0] - 0.1) / (w * w)
            * (-0.5 * x[0] * x[0] - 0.5 * (xi[0] - 0.1) * (xi[0] - 0.1) / (w * w)).exp();
        -a * d
    });
    for c in [0, 3] {
        let err = th.components()[c]
            .iter()
            .zip(exact.values())
            .fold(0.0f64, |m, (v, e)| m.max((v - e).norm()));
        assert!(err < 1e-10, "{err}");
    }
    let zero = theta_apply(&Symbol::field(ScalarField::constant(g, 2.5)), &phi).unwrap();
    assert!(zero.max_abs() < 1e-12);
}

#[test]
fn theta_converges_to_the_classical_force_term() {
    let l = 2.0 * PI;
    let g = UniformGrid::cubic(1, 128, l).unwrap();
    let gs = ScalarField::from_fn(g, |x| 0.8 * x[0].sin());
    let w = 0.3;
    let mut errs = Vec::new();
    for hbar in [0.2, 0.1, 0.05] {
        let pg = PhaseSpaceGrid::new(g, hbar).unwrap();
        let phi = WignerMatrix::from_scalar(&gaussian_symbol_field(pg, w), PauliMatrices::IDENTITY);
        let th = theta_apply(&Symbol::field(gs.clone()), &phi).unwrap();
        // Classical limit -g'(x) d_xi Phi.
        let lim = PhaseSpaceField::from_fn(pg, |x, xi| {
            let d = -(xi[0] - 0.1) / (w * w)
                * (-0.5 * x[0] * x[0] - 0.5 * (xi[0] - 0.1) * (xi[0] - 0.1) / (w * w)).exp();
            -0.8 * x[0].cos() * d
        });
        let e: f64 = th.components()[0]
            .iter()
            .zip(lim.values())
            .map(|(v, e)| (v - e).norm_sqr())
            .sum::<f64>()
            * pg.cell_volume();
        errs.push(e.sqrt());
    }
    for k in 0..2 {
        let order = (errs[k] / errs[k + 1]).log2();
        assert!(order >= 1.9, "order {order}, errors {errs:?}");
    }
}

#[test]
fn kernel_pairing_matches_direct_quadrature() {
    let g = UniformGrid::cubic(1, 128, 16.0).unwrap();
    let hbar = 0.4;
    let a = packet_1d(&g, 0.3, 0.4, 0.5, hbar);
    let mut b = packet_1d(&g, -0.4, -0.2, 0.7, hbar);
    let ov = a.inner(&b).unwrap();
    b.axpy(-ov, &a).unwrap();
    let n = b.norm();
    b.scale(C64::new(1.0 / n, 0.0));
    let state = MixedState::new(vec![a, b], vec![0.6, 0.4], hbar).unwrap();
    let f = wigner_transform(&state).unwrap().trace();
    let basket = Basket::v1();
    assert_eq!(basket.len(), 12);
    for phi in &basket.functions {
        let k = pair_state(&state, phi);
        let q = pair_field(&f, phi);
        assert!((k - q).abs() < 1e-9, "{}: {k} vs {q}", phi.name);
    }
}
