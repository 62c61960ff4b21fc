//! Worker scaling of the Monte Carlo estimators.
//!
//! One worker exercises the plain sequential path; the multi-worker
//! groups go through the chunked thread pool. Outputs are bitwise
//! identical either way, so this measures pure scheduling overhead
//! and speedup.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use fadecap::channel::{ChannelConfig, DecayProfile, TailModel, TapAssignment};
use fadecap::mi::{self, InputModel};

fn reference_channel() -> fadecap::channel::Channel {
    ChannelConfig {
        profile: DecayProfile::new(vec![1.0], TailModel::Geometric { ratio: 0.5 }).unwrap(),
        taps: TapAssignment::Uniform {
            a: Complex64::new(0.5, 0.0),
        },
        noise_var: 1.0,
        power: 10.0,
        blocklength: 6,
    }
    .validate()
    .unwrap()
}

fn bench_exact_mi(c: &mut Criterion) {
    let channel = reference_channel();
    let input = InputModel::OnOff { p_on: 0.5 };
    let samples = 20_000;
    let mut group = c.benchmark_group("exact_mi");
    group.sample_size(10);
    for workers in [1usize, 2, 4, 0] {
        let label = if workers == 0 {
            "all-cores".to_string()
        } else {
            workers.to_string()
        };
        group.bench_with_input(
            BenchmarkId::new("workers", label),
            &workers,
            |b, &workers| {
                b.iter(|| mi::exact_mi(&channel, &input, samples, 7, workers).unwrap())
            },
        );
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let channel = reference_channel();
    let input = InputModel::OnOff { p_on: 0.5 };
    let mut group = c.benchmark_group("simulate_channel");
    group.sample_size(10);
    for workers in [1usize, 0] {
        let label = if workers == 0 { "all-cores" } else { "1" };
        group.bench_with_input(
            BenchmarkId::new("workers", label),
            &workers,
            |b, &workers| {
                b.iter(|| mi::simulate_channel(&channel, &input, 50_000, 7, workers).unwrap())
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_exact_mi, bench_simulate);
criterion_main!(benches);
