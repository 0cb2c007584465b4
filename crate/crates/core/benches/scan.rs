use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use contour_hedge::bootstrap::{generate_ensemble_with, BootstrapConfig, JumpPool};
use contour_hedge::contour::{extract_contour_with, surface_value, SurfaceSpec};
use contour_hedge::criteria::scan_contour;
use contour_hedge::pricing::ContractTerms;
use contour_hedge::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn pool() -> JumpPool {
    let next: Vec<f64> = (0..400)
        .map(|i| 0.985 + 0.03 * ((i * 37 % 400) as f64 / 400.0))
        .collect();
    let weekend: Vec<f64> = (0..100)
        .map(|i| 0.98 + 0.04 * ((i * 13 % 100) as f64 / 100.0))
        .collect();
    JumpPool::new(next, weekend).unwrap()
}

fn bench_contour(c: &mut Criterion) {
    let spec = SurfaceSpec::new(30, 1.0, 0.0).unwrap();
    let c_star = surface_value(&spec, 1.02, 0.98).unwrap();
    let mut group = c.benchmark_group("extract_contour_n30_grid90");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| extract_contour_with(&spec, black_box(c_star), 90, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_ensemble(c: &mut Criterion) {
    let pool = pool();
    let config = BootstrapConfig::new(1000, 30, 42, 100.0).unwrap();
    let mut group = c.benchmark_group("generate_ensemble_1000x30");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_ensemble_with(&pool, black_box(&config), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_scan(c: &mut Criterion) {
    let spec = SurfaceSpec::new(30, 1.0, 0.0).unwrap();
    let contour = extract_contour_with(
        &spec,
        surface_value(&spec, 1.02, 0.98).unwrap(),
        90,
        Execution::default(),
    )
    .unwrap();
    let ensemble = generate_ensemble_with(
        &pool(),
        &BootstrapConfig::new(1000, 30, 42, 100.0).unwrap(),
        Execution::default(),
    )
    .unwrap();
    let terms = ContractTerms::new(30, 100.0, 100.0, 0.0);
    let mut group = c.benchmark_group("scan_contour_90x1000x30");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| scan_contour(&contour, black_box(&ensemble), &terms, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_contour, bench_ensemble, bench_scan);
criterion_main!(benches);
