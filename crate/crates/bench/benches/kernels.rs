use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use platelab::assembly::{build_generator, FeedbackParams, SystemKind};
use platelab::evolution::Integrator;
use platelab::spectral::{resolvent_sweep_reduced, t_operator_eigs, GainEstimator};
use platelab::{build_mode_space, Annulus, PlateConfig, SystemState};

fn hyp() -> FeedbackParams {
    FeedbackParams {
        beta1: 2.0,
        beta2: 1.0,
        gamma1: 3.0,
        gamma2: -2.0,
        tau1: 0.7,
        tau2: 1.1,
    }
}

fn kernels(c: &mut Criterion) {
    let geom = Annulus::new(1.0, 2.0).unwrap();
    let cfg = PlateConfig::new(0.3).unwrap();
    let space = build_mode_space(&geom, &cfg, 2, 64).unwrap();

    c.bench_function("assemble mode space, 64 elements", |b| {
        b.iter(|| build_mode_space(black_box(&geom), &cfg, 2, 64).unwrap())
    });

    c.bench_function("build System 1 generator", |b| {
        b.iter(|| build_generator(SystemKind::System1, black_box(&space), &hyp(), 70, 110).unwrap())
    });

    let gen = build_generator(SystemKind::System2, &space, &hyp(), 70, 110).unwrap();
    let integ = Integrator::new(&gen, 0.01).unwrap();
    c.bench_function("midpoint step, System 2", |b| {
        let mut state = SystemState::random(&gen, 3);
        b.iter(|| integ.step(black_box(&mut state)).unwrap())
    });

    c.bench_function("auxiliary eigenpairs", |b| {
        b.iter(|| t_operator_eigs(black_box(&space), 8).unwrap())
    });

    let lambdas: Vec<f64> = (1..=16).map(|k| k as f64 * 10.0).collect();
    let mut group = c.benchmark_group("resolvent sweep, 16 points");
    group.sample_size(10);
    for (name, est) in [
        ("random", GainEstimator::RandomRhs { seed: 1 }),
        ("operator", GainEstimator::OperatorNorm),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                resolvent_sweep_reduced(
                    &space,
                    &hyp(),
                    SystemKind::System2,
                    black_box(&lambdas),
                    est,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
