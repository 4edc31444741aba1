use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use kp_bench::{edge_lattice, flux_sweep, mixed_lattice, shift_sweep, unit_cell};
use kp_core::{
    bethe_mismatch, build_state, chern_number, count_states_below, find_roots, sweep_flux,
    sweep_shift, SolverOptions,
};

fn roots(c: &mut Criterion) {
    let options = SolverOptions::default();
    let mut group = c.benchmark_group("find_roots");
    for (name, set, k_max) in [
        ("edge_lattice", edge_lattice(0.5), 7.0),
        ("mixed_lattice", mixed_lattice(4.5), 10.0),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &set, |b, set| {
            b.iter(|| find_roots(black_box(set), k_max, &options).unwrap())
        });
    }
    group.finish();

    let set = edge_lattice(0.5);
    c.bench_function("bethe_mismatch", |b| {
        b.iter(|| bethe_mismatch(&set, black_box(3.3)))
    });
    c.bench_function("count_states_below", |b| {
        b.iter(|| count_states_below(&set, black_box(12.0)))
    });
    let root = find_roots(&set, 7.0, &options).unwrap()[10];
    c.bench_function("build_state", |b| {
        b.iter(|| build_state(&set, black_box(&root)).unwrap())
    });
}

fn topology(c: &mut Criterion) {
    let cell = unit_cell();
    let mut group = c.benchmark_group("chern_number");
    group.sample_size(10);
    for n in [16, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| chern_number(&cell, 1, n, n, 256).unwrap())
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let shift = shift_sweep(21);
    group.bench_function("shift_21", |b| {
        b.iter(|| sweep_shift(black_box(&shift)).unwrap())
    });
    let flux = flux_sweep(11);
    group.bench_function("flux_11", |b| {
        b.iter(|| sweep_flux(black_box(&flux)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, roots, topology, sweeps);
criterion_main!(benches);
