use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use blockmix::sem::{m_step, se_row_probabilities};
use blockmix::{ari, complete_data_loglik, fit, ModelSpec, SemConfig};
use blockmix_bench::sim1;

fn steps(c: &mut Criterion) {
    let (x, truth) = sim1(1000, 100, 1);
    let spec = ModelSpec::new(3, 2, 3).unwrap();
    let theta = m_step(&x, &truth, spec).unwrap();
    c.bench_function("m_step 1000x100", |b| {
        b.iter(|| m_step(black_box(&x), &truth, spec).unwrap())
    });
    c.bench_function("cdll 1000x100", |b| {
        b.iter(|| complete_data_loglik(black_box(&x), &truth, &theta).unwrap())
    });
    c.bench_function("row conditional p=100", |b| {
        b.iter(|| {
            se_row_probabilities(black_box(&x), &truth.w_mu, &truth.w_sigma, &theta, 17).unwrap()
        })
    });
}

fn fits(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    for (n, p) in [(200, 50), (1000, 100)] {
        let (x, _) = sim1(n, p, 2);
        g.bench_function(format!("sim1 {n}x{p} default chain"), |b| {
            b.iter(|| {
                fit(
                    black_box(&x),
                    ModelSpec::new(3, 2, 3).unwrap(),
                    &SemConfig::with_seed(0),
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let (_, a) = sim1(100_000, 2, 3);
    let (_, b) = sim1(100_000, 2, 4);
    c.bench_function("ari n=1e5", |bench| {
        bench.iter(|| ari(black_box(&a.z), &b.z).unwrap())
    });
}

criterion_group!(benches, steps, fits, metrics);
criterion_main!(benches);
