use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use ropex_bench::game;
use ropex_core::{
    build_schedule, evaluate_gaps, run, traffic_problem, OperatorTag, Point, PolicyKind, RunConfig,
    SeededStream,
};

fn bench_projection(c: &mut Criterion) {
    let problem = traffic_problem(false, None, 1e4).unwrap();
    let y = Point::new((0..8).map(|i| (i as f64) * 1500.0 - 500.0).collect());
    c.bench_function("project_capped_box_8d", |b| {
        b.iter(|| problem.set.project(black_box(&y)).unwrap())
    });
}

fn bench_oracle(c: &mut Criterion) {
    let problem = game();
    let x = Point::new(vec![30.0, 8.0]);
    let stream = SeededStream::new(9, 0, OperatorTag::Inner).at(1);
    c.bench_function("game_inner_sample", |b| {
        b.iter(|| problem.inner.sample(black_box(&x), &stream).unwrap())
    });
    let traffic = traffic_problem(false, None, 1e4).unwrap();
    let xt = Point::ones(8);
    c.bench_function("traffic_inner_mean", |b| {
        b.iter(|| traffic.inner.mean(black_box(&xt)))
    });
}

fn bench_schedule(c: &mut Criterion) {
    let problem = game();
    c.bench_function("build_adaptive_schedule_4096", |b| {
        b.iter(|| {
            build_schedule(
                PolicyKind::AdaptiveKFree,
                black_box(&problem.constants),
                15.0,
                4096,
                None,
            )
            .unwrap()
        })
    });
}

fn bench_run(c: &mut Criterion) {
    let problem = game();
    let horizon = 4096;
    let d_x = problem.set.require_radius().unwrap();
    let schedule = build_schedule(
        PolicyKind::MonotoneFixed,
        &problem.constants,
        d_x,
        horizon,
        None,
    )
    .unwrap();
    c.bench_function("game_run_4096_steps", |b| {
        b.iter_batched(
            || RunConfig::new(PolicyKind::MonotoneFixed, horizon, 7),
            |config| run(&problem, &schedule, &config).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_metrics(c: &mut Criterion) {
    let problem = game();
    let x = Point::new(vec![27.0, 6.5]);
    c.bench_function("game_analytic_gaps", |b| {
        b.iter(|| evaluate_gaps(&problem, black_box(&x)))
    });
}

criterion_group!(
    benches,
    bench_projection,
    bench_oracle,
    bench_schedule,
    bench_run,
    bench_metrics
);
criterion_main!(benches);
