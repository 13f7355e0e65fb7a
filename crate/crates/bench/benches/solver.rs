use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nodesum_core::{analytic_box_spectrum, build_grid, solve_numeric, PotentialSpec};

fn numeric_box(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_numeric_box");
    for n_points in [501, 2001] {
        let grid = build_grid(0.0, PI, n_points).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n_points), &grid, |b, g| {
            b.iter(|| solve_numeric(&PotentialSpec::particle_in_box(), black_box(g), 10).unwrap())
        });
    }
    group.finish();
}

fn numeric_oscillator(c: &mut Criterion) {
    let grid = build_grid(-8.0, 8.0, 2001).unwrap();
    let potential = PotentialSpec::oscillator(8.0);
    c.bench_function("solve_numeric_oscillator_2001x40", |b| {
        b.iter(|| solve_numeric(&potential, black_box(&grid), 40).unwrap())
    });
}

fn analytic_box(c: &mut Criterion) {
    let grid = build_grid(0.0, PI, 2001).unwrap();
    c.bench_function("analytic_box_2001x400", |b| {
        b.iter(|| analytic_box_spectrum(black_box(&grid), 400).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = numeric_box, numeric_oscillator, analytic_box
}
criterion_main!(benches);
