use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use serfati_core::kernels::{KernelKind, KernelSet};
use serfati_core::random::{band_limited, rng, Band};
use serfati_core::{par, spectral, Grid};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let wide = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().num_threads(wide).build().unwrap()),
    ]
}

fn bench(c: &mut Criterion) {
    let g = Grid::default_2d();
    let theta = band_limited(g, Band::new(0.25, 4.0), 1.0, 1.0, &mut rng(1));
    let ks = KernelSet::new(g, 1.0, KernelKind::Sqg2d).unwrap();

    let mut group = c.benchmark_group("near-field convolution");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| ks.near_conv_perp(&theta).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("spectral gradient");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| spectral::grad(&theta)))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("pointwise reduction");
    let n = 1 << 20;
    let f = |i: usize| ((i as f64) * 1e-3).sin().powi(2);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| par::sum_range(n, f)))
        });
    }
    group.bench_function(BenchmarkId::from_parameter("plain iterator"), |b| {
        b.iter(|| (0..n).map(f).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
