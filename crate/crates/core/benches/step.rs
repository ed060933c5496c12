//! Sequential against rayon execution for FFT round trips, the pointwise
//! nonlinearity and full scheme steps.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use savflow::integrators::Forcing;
use savflow::models::{make_initial, InitialCondition, ModelKind, ModelParams};
use savflow::{Execution, Integrator, ModelSpec, PeriodicGrid, ScalarField, SchemeConfig, SchemeKind};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn model(kind: ModelKind, n: usize, exec: Execution) -> ModelSpec {
    let g = PeriodicGrid::new(2, &[2.0, 2.0], &[n, n]).unwrap().with_execution(exec);
    let params = ModelParams { alpha0: 1e-2, ..Default::default() };
    ModelSpec::new(kind, &g, params).unwrap()
}

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for n in [128, 256] {
        for (name, exec) in POLICIES {
            let g = PeriodicGrid::new(2, &[1.0, 1.0], &[n, n]).unwrap().with_execution(exec);
            let f = ScalarField::from_fn(&g, |x| (6.0 * x[0]).sin() * (4.0 * x[1]).cos());
            group.bench_with_input(BenchmarkId::new(name, n), &f, |b, f| {
                b.iter(|| {
                    let fresh = ScalarField::from_values(f.grid(), f.values().to_vec()).unwrap();
                    black_box(fresh.spectrum().to_field())
                })
            });
        }
    }
    group.finish();
}

fn nonlinearity(c: &mut Criterion) {
    let mut group = c.benchmark_group("f_prime_field");
    for (name, exec) in POLICIES {
        let m = model(ModelKind::AllenCahn, 256, exec);
        let phi = ScalarField::from_fn(m.grid(), |x| x[0].sin() * x[1].cos());
        group.bench_function(name, |b| b.iter(|| black_box(m.f_prime_field(&phi))));
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("scheme_step");
    group.sample_size(20);
    let cases = [
        (ModelKind::AllenCahn, SchemeKind::EopGsav, 2),
        (ModelKind::AllenCahn, SchemeKind::EopSavCn, 2),
        (ModelKind::NavierStokes, SchemeKind::NsEopGsav, 2),
    ];
    for (mk, kind, k) in cases {
        for (name, exec) in POLICIES {
            let m = model(mk, 128, exec);
            let it = Integrator::new(m.clone(), SchemeConfig::new(kind, k, 1e-3), Forcing::None).unwrap();
            let ic = InitialCondition::SmoothRandom { mean: 0.0, amplitude: 0.5, max_mode: 6, seed: 3 };
            let mut st = it.init_state(make_initial(&ic, &m).unwrap(), 0.0).unwrap();
            it.advance(&mut st, k, &mut []).unwrap();
            group.bench_function(BenchmarkId::new(format!("{kind}_k{k}"), name), |b| {
                b.iter_batched(|| st.clone(), |mut s| it.step(&mut s).unwrap(), criterion::BatchSize::LargeInput)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, fft, nonlinearity, steps);
criterion_main!(benches);
