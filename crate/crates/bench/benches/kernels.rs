use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use digimc::exact_diag::{build_hamiltonian, eigensystem};
use digimc::mcmc::ChainStream;
use digimc::stats::integrated_autocorrelation;
use digimc::{DigitizationGrid, PotentialModel};
use digimc_bench::{ar1, free_field, single_boson};

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(20);
    for (name, sys) in [
        ("quartic_a0.5_K10000", single_boson(0.5, 1.0, 10.0, 0.001)),
        ("free_field_a0.5_K500", free_field(0.5, 0.002)),
        ("free_field_a1.0_K200", free_field(1.0, 0.005)),
    ] {
        let mut chain = ChainStream::new(&sys, 1);
        for _ in 0..200 {
            chain.sweep(&sys);
        }
        group.bench_function(name, |b| b.iter(|| chain.sweep(&sys)));
    }
    group.finish();
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigensystem");
    group.sample_size(10);
    for points in [501, 2001] {
        let grid = DigitizationGrid::with_spacing(points, 0.5).unwrap();
        let h = build_hamiltonian(&grid, &PotentialModel::quartic(1.0, -1.0)).unwrap();
        group.bench_function(format!("lambda_{points}"), |b| {
            b.iter_batched(
                || h.clone(),
                |h| eigensystem(&h).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn autocorrelation(c: &mut Criterion) {
    let series = ar1(0.9, 100_000, 3);
    c.bench_function("tau_int_ar1_1e5", |b| {
        b.iter(|| integrated_autocorrelation(&series).unwrap())
    });
}

criterion_group!(benches, sweeps, eigensolver, autocorrelation);
criterion_main!(benches);
