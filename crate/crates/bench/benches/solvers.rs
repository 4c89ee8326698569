use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lsdp_bench::{en_problem, fixture, kernels, local_times, solve_opts};
use lsdp_core::baselines::{train_dmp, train_ridge, DmpGains};
use lsdp_core::elastic_net::solve;
use lsdp_core::features::{encode_shared, FeatureObjective};
use lsdp_core::path::compute_path;
use lsdp_core::trajectory::center;
use lsdp_core::PathGrid;
use std::hint::black_box;

fn elastic_net(c: &mut Criterion) {
    let out = fixture();
    let mut group = c.benchmark_group("elastic_net");
    for p in [20, 50, 100] {
        let (prob, lmax) = en_problem(&out, p, 1e-6);
        group.bench_with_input(BenchmarkId::new("solve", p), &p, |b, _| {
            b.iter(|| solve(black_box(&prob), 0.05 * lmax, &solve_opts(lmax)).unwrap())
        });
    }
    let (prob, lmax) = en_problem(&out, 50, 1e-6);
    let grid = PathGrid { count: 30, ratio: 1e-3 };
    group.sample_size(10);
    group.bench_function("path_30", |b| b.iter(|| compute_path(black_box(&prob), grid, &solve_opts(lmax)).unwrap()));
    group.finish();
}

fn feature_gradient(c: &mut Criterion) {
    let out = fixture();
    let t = local_times(&out);
    let data = center(&out.demos.demos()[0]);
    let mut group = c.benchmark_group("feature_cost_grad");
    for p in [10, 40] {
        let (prob, lmax) = en_problem(&out, p, 1e-6);
        let w = solve(&prob, 0.01 * lmax, &solve_opts(lmax)).unwrap().coef.into_inner();
        let theta = encode_shared(&kernels(&t, p));
        let obj = FeatureObjective::new(t.view(), data.centered.view(), w.view(), 1e-6, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            b.iter(|| obj.cost_grad(black_box(theta.view())).unwrap())
        });
    }
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let out = fixture();
    let demo = &out.demos.demos()[0];
    let mut group = c.benchmark_group("baselines");
    group.bench_function("dmp", |b| b.iter(|| train_dmp(black_box(demo), 10, DmpGains::default()).unwrap()));
    group.bench_function("ridge", |b| b.iter(|| train_ridge(black_box(demo), 10, 1e-6).unwrap()));
    group.finish();
}

criterion_group!(benches, elastic_net, feature_gradient, baselines);
criterion_main!(benches);
