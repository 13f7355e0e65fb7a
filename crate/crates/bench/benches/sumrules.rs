use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use nodesum_core::sumrules::{
    combined_rule, extremum_rule_linear, groundstate_rule, node_rule_quadratic, pair_integral_rule, AbelSchedule,
};
use nodesum_core::susy::trace_identity;
use nodesum_core::{analytic_box_spectrum, analytic_sho_spectrum, build_grid};

fn rules(c: &mut Criterion) {
    let boxed = analytic_box_spectrum(&build_grid(0.0, PI, 2001).unwrap(), 2000).unwrap();
    let sho = analytic_sho_spectrum(&build_grid(-8.0, 8.0, 2001).unwrap(), 800).unwrap();
    let s = black_box(&boxed);
    c.bench_function("node2_box_J2000", |b| b.iter(|| node_rule_quadratic(s, 2, PI / 2.0, 2000).unwrap()));
    c.bench_function("ground_trace_box_J2000", |b| b.iter(|| groundstate_rule(s, 2000).unwrap()));
    c.bench_function("pair_integral_box_J400", |b| {
        b.iter(|| pair_integral_rule(s, 1, PI / 2.0, 2.0 * PI / 3.0, 400).unwrap())
    });
    c.bench_function("combined_box_J400", |b| b.iter(|| combined_rule(s, 2, 400).unwrap()));
    c.bench_function("susy_trace_box_J400", |b| b.iter(|| trace_identity(s, 2, 400).unwrap()));
    let schedule = AbelSchedule::default();
    c.bench_function("ext1_oscillator_abel", |b| {
        b.iter(|| extremum_rule_linear(black_box(&sho), 1, 0.0, &schedule).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = rules
}
criterion_main!(benches);
