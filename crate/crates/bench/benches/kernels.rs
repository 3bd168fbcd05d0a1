use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rclab::dynamics::{
    integrate, make_dataset, rk4_step, DatasetSplit, SamplingProtocol, SystemSpec,
};
use rclab::inference::run_driven;
use rclab::training::train;
use rclab::{DriveMask, Reservoir, ReservoirConfig, ReservoirState};

fn config(n: usize) -> ReservoirConfig {
    ReservoirConfig::from_tuple((n, 0.1, 0.99, 0.9, 1.0, 1e-10), 3).with_seed(7)
}

fn rk4(c: &mut Criterion) {
    let lorenz = SystemSpec::lorenz(28.0);
    c.bench_function("rk4_step lorenz", |b| {
        b.iter(|| rk4_step(&lorenz, black_box(&[1.0, 1.0, 20.0]), 0.0, 0.01).unwrap())
    });
    c.bench_function("integrate lorenz 10k", |b| {
        b.iter(|| integrate(&lorenz, black_box(&[1.0, 1.0, 20.0]), 0.0, 0.01, 10_000).unwrap())
    });
}

fn reservoir_step(c: &mut Criterion) {
    let reservoir = Reservoir::build(&config(500)).unwrap();
    let u = [0.1, -0.2, 0.3];
    let mut scratch = vec![0.0; reservoir.n()];
    c.bench_function("reservoir step n=500", |b| {
        b.iter_batched_ref(
            || ReservoirState::random(500, 3, 1),
            |state| {
                reservoir
                    .step_mut(state, black_box(&u), &mut scratch)
                    .unwrap()
            },
            BatchSize::SmallInput,
        )
    });
}

fn training(c: &mut Criterion) {
    let split = DatasetSplit::for_record(400, 2600, 4000).unwrap();
    let (data, split) = make_dataset(
        &SystemSpec::lorenz(28.0),
        &SamplingProtocol::default(),
        split,
        3,
    )
    .unwrap();
    let cfg = config(500);
    let mut group = c.benchmark_group("training");
    group.sample_size(10);
    group.bench_function("train n=500", |b| {
        b.iter(|| train(black_box(&data), &cfg, split).unwrap())
    });
    let trained = train(&data, &cfg, split).unwrap();
    let segment = data.slice(split.test_start()..data.len()).unwrap();
    let mask = DriveMask::driven(3, &[1]);
    group.bench_function("driven 999 steps n=500", |b| {
        b.iter(|| {
            run_driven(
                &trained,
                &mask,
                &segment,
                ReservoirState::zeros(500, 3),
                999,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, rk4, reservoir_step, training);
criterion_main!(benches);
