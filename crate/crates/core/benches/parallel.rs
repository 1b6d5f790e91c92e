use criterion::{criterion_group, criterion_main, Criterion};

use causeshift::exec::ExecMode;
use causeshift::hsic::hsic_test_with;
use causeshift::seeding::rng_for;
use causeshift::sslbench::{run_benchmark_with, BenchConfig, Category};
use rand::Rng;

fn bench_hsic(c: &mut Criterion) {
    let mut rng = rng_for(1234, 0);
    let u: Vec<f64> = (0..300).map(|_| rng.gen::<f64>()).collect();
    let v: Vec<f64> = u.iter().map(|x| x * x + 0.3 * rng.gen::<f64>()).collect();
    let mut group = c.benchmark_group("hsic_permutations");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| hsic_test_with(ExecMode::Sequential, &u, &v, 199, 7).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| hsic_test_with(ExecMode::Parallel, &u, &v, 199, 7).unwrap())
    });
    group.finish();
}

fn bench_ssl(c: &mut Criterion) {
    let cfg = BenchConfig {
        trials: 20,
        n_unlabeled: 200,
        test_size: 500,
        ..BenchConfig::default()
    };
    let mut group = c.benchmark_group("ssl_benchmark");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_benchmark_with(ExecMode::Sequential, Category::Anticausal, &cfg).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| run_benchmark_with(ExecMode::Parallel, Category::Anticausal, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_hsic, bench_ssl);
criterion_main!(benches);
