use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use telephone_core::{
    all_pairings, coarse_grain, ideal_michalski, instrument_distance, jones_vector, partial_trace,
    phi_plus, run_telephone, zeno_cascade, CascadeParams, DensityOperator, Party,
    PolarizationAngle, SignalingProtocol,
};

fn reduction(c: &mut Criterion) {
    let state = phi_plus();
    c.bench_function("partial_trace_phi_plus", |b| {
        b.iter(|| partial_trace(black_box(state.density()), Party::Bob).unwrap())
    });
}

fn cascade(c: &mut Criterion) {
    let omega = PolarizationAngle::new(FRAC_PI_4);
    let input = DensityOperator::pure(&jones_vector(FRAC_PI_4 + FRAC_PI_2));
    let mut group = c.benchmark_group("zeno_cascade");
    for n in [11usize, 101, 1001] {
        group.bench_with_input(BenchmarkId::new("build_and_apply", n), &n, |b, &n| {
            b.iter(|| {
                zeno_cascade(CascadeParams::new(black_box(n), omega).unwrap()).probabilities(&input)
            })
        });
    }
    group.finish();
}

fn distance(c: &mut Criterion) {
    let ideal = ideal_michalski(PolarizationAngle::new(FRAC_PI_4));
    let cg = coarse_grain(&ideal);
    let pairings = all_pairings(&ideal, &cg);
    c.bench_function("instrument_distance_all_pairings", |b| {
        b.iter(|| {
            pairings
                .iter()
                .map(|p| instrument_distance(&ideal, &cg, p).unwrap())
                .fold(f64::INFINITY, f64::min)
        })
    });
}

fn telephone(c: &mut Criterion) {
    let shots = 100_000;
    let mut group = c.benchmark_group("telephone");
    group.throughput(Throughput::Elements(shots));
    group.sample_size(10);
    group.bench_function("monte_carlo_1e5", |b| {
        b.iter(|| run_telephone(&SignalingProtocol::new(shots, black_box(42))).unwrap())
    });
    group.finish();
}

criterion_group!(benches, reduction, cascade, distance, telephone);
criterion_main!(benches);
