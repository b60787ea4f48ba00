use std::hint::black_box;

use circspline::fosreg::{bootstrap_bands, fit_fos};
use circspline::smoothfit::{optimize_alpha, optimize_rho, solve_pspline, solve_smoothing};
use circspline::splinecore::collocation_matrix;
use circspline::{Grid, KnotConfig, PSplineConfig, SmoothingConfig};
use circspline_bench::{midpoints, problem, regression};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn basis(c: &mut Criterion) {
    let xs = midpoints(360);
    for g in [9, 24] {
        let knots = KnotConfig::circular(3, g).unwrap();
        c.bench_with_input(BenchmarkId::new("collocation_360", g), &knots, |b, k| {
            b.iter(|| collocation_matrix(k, black_box(&xs)).unwrap())
        });
    }
}

fn fit(c: &mut Criterion) {
    let p = problem(9);
    let sc = SmoothingConfig::new(0.927, 1).unwrap();
    let pc = PSplineConfig::new(0.07, 1).unwrap();
    c.bench_function("solve_smoothing", |b| b.iter(|| solve_smoothing(black_box(&p), &sc).unwrap()));
    c.bench_function("solve_pspline", |b| b.iter(|| solve_pspline(black_box(&p), &pc).unwrap()));
}

fn optimize(c: &mut Criterion) {
    let p = problem(9);
    c.bench_function("optimize_alpha", |b| b.iter(|| optimize_alpha(black_box(&p), 2).unwrap()));
    c.bench_function("optimize_rho", |b| b.iter(|| optimize_rho(black_box(&p), 2, false).unwrap()));
}

fn bootstrap(c: &mut Criterion) {
    let ds = regression(120);
    let model = fit_fos(&ds).unwrap();
    let grid = Grid::circular(360).unwrap();
    let mut group = c.benchmark_group("regression");
    group.sample_size(10);
    group.bench_function("fit_fos_120", |b| b.iter(|| fit_fos(black_box(&ds)).unwrap()));
    group.bench_function("bootstrap_500", |b| b.iter(|| bootstrap_bands(&model, &ds, 500, 0.95, 7, &grid).unwrap()));
    group.finish();
}

criterion_group!(benches, basis, fit, optimize, bootstrap);
criterion_main!(benches);
