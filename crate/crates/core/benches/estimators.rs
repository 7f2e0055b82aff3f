use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use percaniso_core::coupling::coupled_size_pmf_with;
use percaniso_core::explore::{cluster_size_pmf_with, crossing_probability_with, estimate_theta_with};
use percaniso_core::{BoxLimits, Exec, Params};

fn modes() -> Vec<(&'static str, Exec)> {
    let mut m = vec![("sequential", Exec::Sequential)];
    if cfg!(feature = "parallel") {
        m.push(("parallel", Exec::Parallel));
    }
    m
}

fn theta(c: &mut Criterion) {
    let params = Params::new(vec![0.55, 0.5]).unwrap();
    let limits = BoxLimits::new(20_000, 48).unwrap();
    let mut g = c.benchmark_group("estimate_theta");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "d2_r48_200"), |b| {
            b.iter(|| estimate_theta_with(exec, &params, 200, limits, 1).unwrap())
        });
    }
    g.finish();
}

fn pmf(c: &mut Criterion) {
    let high = Params::new(vec![0.3, 0.2, 0.2]).unwrap();
    let low = Params::new(vec![0.3, 0.36]).unwrap();
    let mut g = c.benchmark_group("size_pmf");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "direct_10k"), |b| {
            b.iter(|| cluster_size_pmf_with(exec, &low, 10_000, 50, 2).unwrap())
        });
        g.bench_function(BenchmarkId::new(name, "coupled_10k"), |b| {
            b.iter(|| coupled_size_pmf_with(exec, &high, 10_000, 50, 3).unwrap())
        });
    }
    g.finish();
}

fn crossing(c: &mut Criterion) {
    let params = Params::new(vec![0.3, 0.7]).unwrap();
    let mut g = c.benchmark_group("crossing");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "L64_200"), |b| {
            b.iter(|| crossing_probability_with(exec, &params, 64, 200, 4).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, theta, pmf, crossing);
criterion_main!(benches);
