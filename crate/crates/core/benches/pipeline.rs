//! Benchmarks of the data-parallel hot paths: gap series evaluation,
//! constraint harvesting and Monte Carlo volume.
//!
//! With the default `parallel` feature each group compares the rayon
//! default pool against a single-thread pool over the same public entry
//! points. Build with `--no-default-features` to measure the plain
//! sequential fallback instead.

use anosov_core::blocks::{Decomposition, RepSpec, Structure};
use anosov_core::certify::{certify, gap_series, Thresholds};
use anosov_core::configs::ThetaSet;
use anosov_core::domain::{constraints_with_config, mc_volume, HalfSpace};
use anosov_core::words::FreeGroup;
use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use std::hint::black_box;

fn worked_zeta() -> RepSpec<f64> {
    let group = FreeGroup::new(2).unwrap();
    let dec = Decomposition::new(vec![2, 1]).unwrap();
    let za = DMatrix::from_row_slice(
        3,
        3,
        &[3.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 1.0],
    );
    let zb = DMatrix::from_row_slice(
        3,
        3,
        &[
            5.0 / 3.0,
            4.0 / 3.0,
            0.0,
            4.0 / 3.0,
            5.0 / 3.0,
            0.0,
            0.0,
            0.0,
            1.0,
        ],
    );
    RepSpec::new(group, dec, vec![za, zb], Structure::BlockNormalized).unwrap()
}

#[cfg(feature = "parallel")]
fn single_thread_pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
}

fn bench_gap_series(c: &mut Criterion) {
    let zeta = worked_zeta();
    let theta = ThetaSet::new(3, [1, 2]).unwrap();
    let thr = Thresholds::default();
    let mut group = c.benchmark_group("gap_series_len9");
    group.sample_size(20);
    #[cfg(feature = "parallel")]
    {
        let pool = single_thread_pool();
        group.bench_function("one_thread", |b| {
            b.iter(|| pool.install(|| gap_series(black_box(&zeta), &theta, 9, &thr).unwrap()))
        });
        group.bench_function("default_pool", |b| {
            b.iter(|| gap_series(black_box(&zeta), &theta, 9, &thr).unwrap())
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| gap_series(black_box(&zeta), &theta, 9, &thr).unwrap())
    });
    group.finish();
}

fn bench_constraints(c: &mut Criterion) {
    let zeta = worked_zeta();
    let theta = ThetaSet::new(3, [1, 2]).unwrap();
    let thr = Thresholds::default();
    let report = certify(&zeta, &theta, 8, &thr).unwrap();
    let config = report.unique_config.clone().unwrap();
    let mut group = c.benchmark_group("constraints_len8");
    group.sample_size(20);
    #[cfg(feature = "parallel")]
    {
        let pool = single_thread_pool();
        group.bench_function("one_thread", |b| {
            b.iter(|| {
                pool.install(|| constraints_with_config(black_box(&zeta), &config, 8).unwrap())
            })
        });
        group.bench_function("default_pool", |b| {
            b.iter(|| constraints_with_config(black_box(&zeta), &config, 8).unwrap())
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| constraints_with_config(black_box(&zeta), &config, 8).unwrap())
    });
    group.finish();
}

fn bench_volume(c: &mut Criterion) {
    let square: Vec<HalfSpace> = vec![
        HalfSpace::new(vec![1.0, 0.0], 1.0),
        HalfSpace::new(vec![-1.0, 0.0], 1.0),
        HalfSpace::new(vec![0.0, 1.0], 1.0),
        HalfSpace::new(vec![0.0, -1.0], 1.0),
        HalfSpace::new(vec![1.0, 1.0], 1.5),
        HalfSpace::new(vec![-1.0, 1.0], 1.5),
    ];
    let mut group = c.benchmark_group("mc_volume_1m");
    group.sample_size(20);
    #[cfg(feature = "parallel")]
    {
        let pool = single_thread_pool();
        group.bench_function("one_thread", |b| {
            b.iter(|| pool.install(|| mc_volume(black_box(&square), 2, 1_000_000, 42).unwrap()))
        });
        group.bench_function("default_pool", |b| {
            b.iter(|| mc_volume(black_box(&square), 2, 1_000_000, 42).unwrap())
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| mc_volume(black_box(&square), 2, 1_000_000, 42).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_gap_series, bench_constraints, bench_volume);
criterion_main!(benches);
