use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qslab_core::manifold::StableManifoldChart;
use qslab_core::model::ReducedSystem;
use qslab_core::observables::ObservableSystem;
use qslab_core::spectral::{random_field, SpectralModel};
use qslab_core::{default_dt, integrate, to_observables, Complex64, ModeState, ModelParams, TimeGrid};

fn state() -> ModeState {
    ModeState::new(
        Complex64::new(0.02, 0.01),
        Complex64::new(0.015, -0.005),
        Complex64::new(0.01, 0.0),
        Complex64::new(-0.004, 0.008),
    )
}

fn vector_fields(c: &mut Criterion) {
    let s = state();
    for delta in [1.0, 0.95] {
        let sys = ReducedSystem::new(ModelParams::new(0.01, delta).unwrap()).unwrap();
        c.bench_function(&format!("reduced_rhs/delta={delta}"), |b| b.iter(|| sys.rhs(black_box(&s))));
    }
    let obs_sys = ObservableSystem::new(&ModelParams::symmetric(0.01).unwrap()).unwrap();
    let o = to_observables(&s).unwrap();
    c.bench_function("observable_rhs", |b| b.iter(|| obs_sys.rhs(black_box(&o))));

    let model = SpectralModel::new(6, 1.0, 0.01).unwrap();
    let field = random_field(1, 6, 1.0, 1e-4).unwrap();
    c.bench_function("spectral_rhs/K=6", |b| b.iter(|| model.rhs(black_box(&field))));
}

fn runs(c: &mut Criterion) {
    let nu = 0.01;
    let sys = ReducedSystem::new(ModelParams::symmetric(nu).unwrap()).unwrap();
    let grid = TimeGrid::fixed(0.0, 1.0 / nu, default_dt(nu)).unwrap().with_stride(100).unwrap();
    c.bench_function("integrate_reduced/1e5_steps", |b| {
        b.iter(|| integrate(|y: &ModeState| sys.rhs(y), black_box(state()), &grid).unwrap())
    });
    c.bench_function("stable_manifold_chart", |b| b.iter(|| StableManifoldChart::new(black_box(0.5), 0.1).unwrap()));
}

criterion_group!(benches, vector_fields, runs);
criterion_main!(benches);
