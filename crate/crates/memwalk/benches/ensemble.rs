//! Throughput benchmarks: the data-parallel ensemble against the
//! sequential fallback, plus the exact-enumeration oracle and the O(t)
//! moment recursion.
//!
//! Run `cargo bench -p memwalk`; add `--no-default-features` to measure a
//! build without the parallel path.

use criterion::{criterion_group, criterion_main, Criterion};

use memwalk::exact;
use memwalk::mc::{run_ensemble_sequential, EnsembleConfig};
use memwalk::model::Parameters;
use memwalk::moments::mean_square_recursion;

fn params() -> Parameters {
    Parameters::new(0.5, 0.3, 0.2, 0.5).unwrap()
}

fn bench_ensemble(c: &mut Criterion) {
    let pr = params();
    let config = EnsembleConfig::new(42, 4096, 1024).unwrap();

    let mut group = c.benchmark_group("ensemble_4096x1024");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| memwalk::mc::run_ensemble(pr, &config).unwrap())
    });

    group.bench_function("sequential", |b| {
        b.iter(|| run_ensemble_sequential(pr, &config).unwrap())
    });
    group.finish();
}

fn bench_exact(c: &mut Criterion) {
    let pr = params();
    c.bench_function("exact_evolve_t128", |b| {
        b.iter(|| exact::evolve(pr, 128).unwrap())
    });
}

fn bench_recursion(c: &mut Criterion) {
    let pr = Parameters::new(0.75, 0.25, 0.0, 0.5).unwrap();
    c.bench_function("mean_square_recursion_1e6", |b| {
        b.iter(|| mean_square_recursion(pr, 1_000_000))
    });
}

criterion_group!(benches, bench_ensemble, bench_exact, bench_recursion);
criterion_main!(benches);
