use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use plurikit_bench::{currents, generic_line, grid, SEED};
use plurikit_core::mass::DEFAULT_CONTOUR_BUDGET;
use plurikit_core::{
    count_zeros_disc, estimate_order, nu_profile, sample_grassmannian, sample_sphere, slice_profile, RadialProfile,
};

fn samplers(c: &mut Criterion) {
    c.bench_function("sample_sphere n=4 x 1e4", |b| {
        b.iter(|| sample_sphere(4, 1.0, 10_000, black_box(SEED)).unwrap())
    });
    c.bench_function("sample_grassmannian q=2 n=4 x 1e3", |b| {
        b.iter(|| sample_grassmannian(2, 4, 1000, black_box(SEED)).unwrap())
    });
}

fn profiles(c: &mut Criterion) {
    let g = grid().unwrap();
    let line = generic_line().unwrap();
    let mut group = c.benchmark_group("profiles");
    group.sample_size(10);
    for (name, t) in currents().unwrap() {
        group.bench_with_input(BenchmarkId::new("nu_profile", name), &t, |b, t| {
            b.iter(|| nu_profile(t, &g, 10_000, SEED).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("slice_profile", name), &t, |b, t| {
            b.iter(|| slice_profile(t, &line, &g, 10_000, SEED).unwrap())
        });
    }
    group.finish();
}

fn zeros_and_orders(c: &mut Criterion) {
    let exp_line = match plurikit_core::restrict_current(&currents().unwrap()[2].1, &generic_line().unwrap()) {
        Ok(plurikit_core::Current::ZeroSet { f }) => f,
        _ => unreachable!("the exp curve restricts to a zero set"),
    };
    c.bench_function("count_zeros_disc exp slice r=50", |b| {
        b.iter(|| count_zeros_disc(&exp_line, black_box(50.0), DEFAULT_CONTOUR_BUDGET).unwrap())
    });
    let g = plurikit_core::RadialGrid::new(1.0, 1e4, 41).unwrap();
    let p = RadialProfile::from_fn(g, |r| r * r * (1.0 + 0.1 * r.ln().sin())).unwrap();
    c.bench_function("estimate_order 41 points", |b| b.iter(|| estimate_order(black_box(&p)).unwrap()));
}

criterion_group!(benches, samplers, profiles, zeros_and_orders);
criterion_main!(benches);
