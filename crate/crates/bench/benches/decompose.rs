use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rrcnn::baselines::{csa_average, if_decompose, IfConfig};
use rrcnn::eval::ExampleId;
use rrcnn::model::{cascade_forward, predict_batch, ModelParams, ModelShape, DEFAULT_K};
use rrcnn::train::{backprop, LossSpec};

fn model() -> ModelParams {
    ModelParams::init(&ModelShape::uniform(2, 3, DEFAULT_K, DEFAULT_K), 1).unwrap()
}

fn forward(c: &mut Criterion) {
    let p = model();
    let x = ExampleId::E4.default_signal().unwrap().input.into_samples();
    c.bench_function("cascade_forward n1024 m2 s3 k33", |b| {
        b.iter(|| cascade_forward(black_box(&x), &p).unwrap())
    });
}

fn gradient(c: &mut Criterion) {
    let p = model();
    let ex = ExampleId::E6.default_signal().unwrap();
    let x = ex.input.samples().to_vec();
    let label: Vec<Vec<f64>> = ex.components.iter().map(|s| s.samples().to_vec()).collect();
    let spec = LossSpec::mse();
    c.bench_function("backprop n1024 m2 s3 k33", |b| {
        b.iter(|| backprop(black_box(&x), &label, &p, &spec).unwrap())
    });
}

fn baselines(c: &mut Criterion) {
    let x = ExampleId::E4.default_signal().unwrap().input;
    let cfg = IfConfig::default();
    c.bench_function("iterative filtering e4", |b| b.iter(|| if_decompose(black_box(&x), &cfg).unwrap()));
    c.bench_function("spline envelope average e4", |b| b.iter(|| csa_average(black_box(&x)).unwrap()));
}

fn batch(c: &mut Criterion) {
    let p = model();
    let x = ExampleId::E4.default_signal().unwrap().input.into_samples();
    let signals = vec![x; 100];
    let mut g = c.benchmark_group("predict_batch 100 copies");
    g.sample_size(10);
    for lanes in [1, 2, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(lanes), &lanes, |b, &lanes| {
            b.iter(|| predict_batch(black_box(&signals), &p, lanes).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, forward, gradient, baselines, batch);
criterion_main!(benches);
