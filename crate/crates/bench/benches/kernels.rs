use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cone_harmonic::radial::log_grid;
use cone_harmonic::{
    build_spectrum, extend, solve_profile, BoundaryData, GrowthBound, LinkKind, Regime, WarpingFunction,
};

fn radial_profiles(c: &mut Criterion) {
    let grid = log_grid(1e-3, 1e3, 32);
    let mut group = c.benchmark_group("solve_profile");
    for w in [WarpingFunction::hyperbolic(), WarpingFunction::bounded()] {
        for m in [1usize, 8] {
            let id = BenchmarkId::new(w.name(), m);
            group.bench_with_input(id, &m, |b, &m| {
                b.iter(|| solve_profile(&w, 3, (m * (m + 1)) as f64, black_box(&grid)).unwrap())
            });
        }
    }
    group.finish();
}

fn growth_bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("growth_bound");
    for (name, regime) in [("general", Regime::General), ("nonneg", Regime::NonnegCurvature)] {
        let w = WarpingFunction::hyperbolic();
        group.bench_function(name, |b| {
            b.iter(|| GrowthBound::new(regime, 4, black_box(3f64.sqrt()), &w).unwrap())
        });
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let sphere = build_spectrum(LinkKind::RoundSphere2, 3, 16).unwrap();
    let h = BoundaryData::random(&sphere, 1, 0).unwrap();
    c.bench_function("project_sphere2_m16", |b| {
        b.iter(|| sphere.project(black_box(h.samples())).unwrap())
    });

    let circle = build_spectrum(LinkKind::Circle, 2, 16).unwrap();
    let h = BoundaryData::random(&circle, 1, 0).unwrap();
    let w = WarpingFunction::hyperbolic();
    c.bench_function("extend_circle_m16", |b| {
        b.iter(|| extend(&h, black_box(100.0), &circle, &w, 2).unwrap())
    });
}

criterion_group!(benches, radial_profiles, growth_bound, spectral);
criterion_main!(benches);
