use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use noxsim_core::*;

fn channels(c: &mut Criterion) {
    let ch = PauliChannel::local_depolarizing(4, &[0, 1, 2, 3], 0.01).unwrap();
    c.bench_function("channel_power_11_4q", |b| b.iter(|| black_box(&ch).power(11).unwrap()));
    c.bench_function("channel_compose_4q", |b| b.iter(|| black_box(&ch).compose(&ch).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let circ = build_scattering_circuit(&ScatteringParams::default(), 7).unwrap();
    let nm = NoiseModel::depolarizing(4, 0.01).unwrap();
    c.bench_function("simulate_exact_step7", |b| b.iter(|| simulate_exact(black_box(&circ), &nm).unwrap()));
    c.bench_function("ideal_distribution_step7", |b| b.iter(|| ideal_distribution(black_box(&circ)).unwrap()));
    c.bench_function("trajectories_1000_step7", |b| {
        b.iter(|| simulate_trajectories(black_box(&circ), &nm, &NoiseContext::default(), 1000, 7).unwrap())
    });
}

fn compilation(c: &mut Criterion) {
    let circ = build_scattering_circuit(&ScatteringParams::default(), 7).unwrap();
    c.bench_function("rc_compile_30_step7", |b| b.iter(|| rc_compile(black_box(&circ), 30, 1).unwrap()));
    c.bench_function("nox_family_30_step7", |b| b.iter(|| nox_family(black_box(&circ), 10, 30, 1).unwrap()));
}

criterion_group!(benches, channels, simulation, compilation);
criterion_main!(benches);
