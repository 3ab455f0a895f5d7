use criterion::{criterion_group, criterion_main, Criterion};
use pauli_bench::{blob, packet_state, poisson_config, uniform_b};
use pauli_core::fields::{solve_poisson, PoissonConfig};
use pauli_core::nbody::{InitialKind, NBodyHamiltonian, NBodyPropagator, NBodyWavefunction};
use pauli_core::vlasov::{LorentzFields, VlasovConfig, VlasovSolver};
use pauli_core::wigner::wigner_transform;
use pauli_core::{density, GaugeField, PauliSolver, C64};

fn strang_step(c: &mut Criterion) {
    let state = packet_state(2, 128, 1.0).unwrap();
    let cfg = poisson_config(1e-3);
    let mut solver = PauliSolver::new(&state, &GaugeField::zero(*state.grid()), &cfg).unwrap();
    let mut s = state.clone();
    c.bench_function("strang_step_poisson_128x128", |b| {
        b.iter(|| solver.step(&mut s).unwrap())
    });

    let gauge = uniform_b(state.grid()).unwrap();
    let mut solver = PauliSolver::new(&state, &gauge, &cfg).unwrap();
    let mut s = state.clone();
    c.bench_function("strang_step_uniform_b_128x128", |b| {
        b.iter(|| solver.step(&mut s).unwrap())
    });
}

fn poisson(c: &mut Criterion) {
    let state = packet_state(2, 256, 1.0).unwrap();
    let rho = density(&state);
    let periodic = PoissonConfig::periodic(1.0);
    c.bench_function("poisson_periodic_256x256", |b| {
        b.iter(|| solve_poisson(&rho, &periodic).unwrap())
    });
    let rho3 = density(&packet_state(3, 32, 1.0).unwrap());
    let free = PoissonConfig::free_space(1.0);
    c.bench_function("poisson_free_space_32x32x32", |b| {
        b.iter(|| solve_poisson(&rho3, &free).unwrap())
    });
}

fn wigner(c: &mut Criterion) {
    let state = packet_state(2, 32, 0.5).unwrap();
    c.bench_function("wigner_transform_32x32", |b| {
        b.iter(|| wigner_transform(&state).unwrap())
    });
}

fn vlasov(c: &mut Criterion) {
    let f0 = blob(2, 32).unwrap();
    let cfg = VlasovConfig {
        dt: 0.05,
        ..VlasovConfig::default()
    };
    let mut solver = VlasovSolver::new(*f0.grid(), LorentzFields::none(), &cfg).unwrap();
    let mut f = f0.clone();
    c.bench_function("vlasov_step_2d2v_32", |b| {
        b.iter(|| solver.step(&mut f).unwrap())
    });
}

fn nbody(c: &mut Criterion) {
    let grid = pauli_core::UniformGrid::cubic(1, 32, 8.0).unwrap();
    let orbital: Vec<C64> = (0..32)
        .map(|i| C64::new((-(grid.coord(0, i)).powi(2)).exp(), 0.0))
        .collect();
    let h = NBodyHamiltonian {
        kernel: Some(pauli_core::fields::InteractionKernel::softened(1.0, 0.5)),
        ..NBodyHamiltonian::free(1.0)
    };
    let prop = NBodyPropagator::new(3, grid, false, &h, 1e-3).unwrap();
    let mut psi =
        NBodyWavefunction::build(InitialKind::HartreeProduct, 3, grid, false, &[orbital]).unwrap();
    c.bench_function("nbody_step_n3_32", |b| {
        b.iter(|| prop.step(&mut psi).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = strang_step, poisson, wigner, vlasov, nbody
}
criterion_main!(benches);
