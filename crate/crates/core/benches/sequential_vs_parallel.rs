use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use scatter_sampling::harness::{gen_gaussian_mixture, run_benchmark, BenchmarkConfig, DatasetSpec, MixtureSpec, SizeSpec};
use scatter_sampling::metrics::kde_field;
use scatter_sampling::outliers::lof_scores_with;
use scatter_sampling::par::Parallelism;
use scatter_sampling::{sample, SamplingParams, Seed, StrategyId};

const MODES: [Parallelism; 2] = [Parallelism::Sequential, Parallelism::Parallel];

fn mixture(n: usize) -> scatter_sampling::LabeledDataset {
    gen_gaussian_mixture(&MixtureSpec { classes: 5, n, seed: Seed(1) }).unwrap()
}

fn lof(c: &mut Criterion) {
    let ds = mixture(20_000);
    let mut g = c.benchmark_group("lof_k20_n20000");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| lof_scores_with(black_box(ds.points()), 20, m).unwrap())
        });
    }
    g.finish();
}

fn kde(c: &mut Criterion) {
    let ds = mixture(20_000);
    let mut g = c.benchmark_group("kde_64x64_n20000");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| kde_field(black_box(ds.points()), 0.02, 64, m).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("bench_sweep");
    g.sample_size(10);
    for mode in MODES {
        let cfg = BenchmarkConfig {
            datasets: vec![DatasetSpec::Mixture {
                spec: MixtureSpec { classes: 4, n: 4000, seed: Seed(2) },
                name: None,
            }],
            size: SizeSpec::Rate(0.1),
            seeds: vec![0, 1, 2, 3],
            region_questions: 20,
            class_questions: 20,
            bootstrap_resamples: 1000,
            parallelism: mode,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &cfg, |b, cfg| {
            b.iter(|| run_benchmark(cfg).unwrap())
        });
    }
    g.finish();
}

fn strategies(c: &mut Criterion) {
    let ds = mixture(60_000);
    let mut g = c.benchmark_group("sample_60000_to_2531");
    g.sample_size(10);
    for s in StrategyId::ALL {
        g.bench_function(s.acronym(), |b| b.iter(|| sample(s, &ds, &SamplingParams::new(2531, 7)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, lof, kde, sweep, strategies);
criterion_main!(benches);
