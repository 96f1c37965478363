//! Parallel-vs-sequential throughput on the two hot loops: exhaustive
//! sequence search and Monte Carlo session simulation. The `parallel`
//! feature (default) routes both through rayon; `exec::with_sequential`
//! forces the fallback path inside one process for comparison.

use criterion::{criterion_group, criterion_main, Criterion};
use svf_core::dist::ServiceDistribution as D;
use svf_core::exec;
use svf_core::lindley::{evaluate_mc, Instance, Schedule, Sequence};
use svf_core::sequence::{enumerate_optimal, SearchConfig};

fn exp_linear(n: usize) -> Instance {
    Instance::new(
        (1..=n)
            .map(|i| D::exponential((n + 1 - i) as f64).unwrap())
            .collect(),
        1.0,
    )
    .unwrap()
}

fn bench_search(c: &mut Criterion) {
    let inst = exp_linear(8);
    let cfg = SearchConfig::mean_based();
    let mut g = c.benchmark_group("search_exp_n8");
    g.sample_size(20);
    g.bench_function("sequential", |b| {
        b.iter(|| exec::with_sequential(|| enumerate_optimal(&inst, &cfg).unwrap()))
    });
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| {
        b.iter(|| enumerate_optimal(&inst, &cfg).unwrap())
    });
    g.finish();
}

fn bench_mc(c: &mut Criterion) {
    let inst = Instance::new(
        (1..=6)
            .map(|i| D::lognormal(3.0 + (i as f64).ln(), 0.4).unwrap())
            .collect(),
        0.5,
    )
    .unwrap();
    let seq = Sequence::identity(6);
    let sched = Schedule(inst.means());
    let mut g = c.benchmark_group("mc_100k_paths");
    g.sample_size(20);
    g.bench_function("sequential", |b| {
        b.iter(|| {
            exec::with_sequential(|| evaluate_mc(&inst, &seq, &sched, 100_000, 7).unwrap())
        })
    });
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| {
        b.iter(|| evaluate_mc(&inst, &seq, &sched, 100_000, 7).unwrap())
    });
    g.finish();
}

fn bench_convolution(c: &mut Criterion) {
    let d = D::lognormal(50f64.ln(), 0.33).unwrap();
    let pmf = d.discretize(0.25, 1e-12).unwrap();
    c.bench_function("pmf_convolve_lognormal", |b| b.iter(|| pmf.convolve(&pmf)));
}

criterion_group!(benches, bench_search, bench_mc, bench_convolution);
criterion_main!(benches);
