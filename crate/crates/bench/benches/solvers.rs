use bmax_bench::{flat_params, preset_data};
use bmax_core::experiments::{
    cross_validate_omega, default_omega_sq_grid, run_replications, CvMethod, ExperimentConfig,
};
use bmax_core::solvers::GreedyBmax;
use bmax_core::{gma_0, gma_bmax, solve_bmax_exact, Entropy, ExactMethod, ExactSolveOptions, Problem};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn greedy(c: &mut Criterion) {
    let (dict, obs) = preset_data("exp1", 0);
    let gram = dict.gram();
    let mut group = c.benchmark_group("greedy");
    for omega_sq in [2.0, 8.0, 50.0] {
        let params = flat_params(dict.m(), omega_sq, Entropy::Kl);
        let problem = Problem::new(&dict, &obs, &params).unwrap();
        group.bench_with_input(BenchmarkId::new("gma_bmax_first_step", omega_sq), &problem, |b, p| {
            b.iter(|| GreedyBmax::new(p, &gram).unwrap().step().unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gma_bmax_150", omega_sq), &problem, |b, p| {
            b.iter(|| gma_bmax(black_box(p), 150).unwrap())
        });
    }
    let params = flat_params(dict.m(), 4.0, Entropy::Linear);
    let problem = Problem::new(&dict, &obs, &params).unwrap();
    group.bench_function("gma_0_150", |b| b.iter(|| gma_0(black_box(&problem), 150).unwrap()));
    group.finish();
}

fn exact(c: &mut Criterion) {
    let (dict, obs) = preset_data("exp1", 0);
    let params = flat_params(dict.m(), 8.0, Entropy::Kl);
    let problem = Problem::new(&dict, &obs, &params).unwrap();
    let mut group = c.benchmark_group("exact");
    for (name, method) in [
        ("newton", ExactMethod::Newton),
        ("fixed_point", ExactMethod::FixedPoint),
    ] {
        let opts = ExactSolveOptions {
            method,
            ..Default::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| solve_bmax_exact(black_box(&problem), &opts).unwrap())
        });
    }
    group.finish();
}

fn experiment(c: &mut Criterion) {
    let (dict, obs) = preset_data("exp2", 0);
    let base = flat_params(dict.m(), 1.0, Entropy::Kl);
    let grid = default_omega_sq_grid(2.0);
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("cv_gma_bmax", |b| {
        b.iter(|| cross_validate_omega(&dict, &obs, &base, &grid, 10, CvMethod::GmaBmax, 0).unwrap())
    });
    let mut config = ExperimentConfig::exp1(0);
    config.replicates = 2;
    group.bench_function("exp1_two_replicates", |b| {
        b.iter(|| run_replications(&config, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, greedy, exact, experiment);
criterion_main!(benches);
