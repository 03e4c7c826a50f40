use std::hint::black_box;

use cabinfare::lasso::{coordinate_descent, plugin_lambda, rlasso, LassoConfig, PenaltyLoadings, Standardized};
use cabinfare_bench::lasso_instance;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("coordinate_descent");
    for &(n, p) in &[(200, 20), (2_000, 500)] {
        let dm = lasso_instance(n, p, 7);
        let x = Standardized::all(&dm, &vec![true; p]).unwrap();
        let cfg = LassoConfig::default();
        let lambda = plugin_lambda(n, p, &cfg);
        let psi = PenaltyLoadings { values: vec![1.0; p] };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{p}")), &(), |b, _| {
            b.iter(|| coordinate_descent(black_box(&x), black_box(&dm.y), lambda, &psi, &cfg, None))
        });
    }
    group.finish();
}

fn plug_in(c: &mut Criterion) {
    let dm = lasso_instance(2_000, 500, 8);
    let x = Standardized::all(&dm, &[true; 500]).unwrap();
    let cfg = LassoConfig::default();
    c.bench_function("rlasso 2000x500", |b| b.iter(|| rlasso(black_box(&x), black_box(&dm.y), &cfg).unwrap()));
}

criterion_group!(benches, solver, plug_in);
criterion_main!(benches);
