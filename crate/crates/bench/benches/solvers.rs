use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evshock::experiments::suite::build_scheme;
use evshock::experiments::{ExperimentConfig, Variant};
use evshock::taylor::{mul_truncated_into, HermiteInterpolator};
use evshock::viscosity::LglResidual;
use evshock::{initial_data_catalog, ExperimentId, Scheme, StepController};

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("ten_steps_moving_shock");
    group.sample_size(20);
    let problem = initial_data_catalog(ExperimentId::MovingShock);
    for v in [Variant::FV1, Variant::DG1, Variant::DGP, Variant::H1, Variant::HP] {
        let cfg = ExperimentConfig::defaults(ExperimentId::MovingShock, v).unwrap();
        for n in [80usize, 320] {
            let base = build_scheme(&cfg, &problem, n).unwrap();
            let dt = StepController::for_scheme(base.as_ref(), problem.final_time)
                .unwrap()
                .nominal_dt();
            group.bench_with_input(BenchmarkId::new(v.as_str(), n), &n, |b, &n| {
                b.iter(|| {
                    let mut s: Box<dyn Scheme> = build_scheme(&cfg, &problem, n).unwrap();
                    for _ in 0..10 {
                        black_box(s.step(dt).unwrap());
                    }
                })
            });
        }
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let m = 4;
    let a: Vec<f64> = (0..2 * m + 2).map(|k| (0.3 * k as f64).sin()).collect();
    let mut out = vec![0.0; 2 * m + 2];
    c.bench_function("truncated_product_len10", |b| {
        b.iter(|| mul_truncated_into(black_box(&a), black_box(&a), &mut out))
    });
    let interp = HermiteInterpolator::new(m);
    c.bench_function("hermite_interpolate_m4", |b| {
        b.iter(|| interp.interpolate_into(black_box(&a[..m + 1]), black_box(&a[m + 1..]), &mut out))
    });
    let lgl = LglResidual::new(m).unwrap();
    let prev = vec![0.1; m + 1];
    c.bench_function("dg_residual_m4", |b| {
        b.iter(|| lgl.residual(black_box(&a[..m + 1]), &prev, 1e-3, 0.01))
    });
}

criterion_group!(benches, steps, kernels);
criterion_main!(benches);
