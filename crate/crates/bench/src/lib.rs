//! Deterministic inputs shared by the benchmarks.

use std::f64::consts::TAU;

use circspline::{DMatrix, FitProblem, KnotConfig, RegressionDataset};

/// Bin midpoints of `m` equal bins on `[0, 2π)`.
pub fn midpoints(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) * TAU / m as f64).collect()
}

/// Smooth bimodal clr-like targets with a fixed high-frequency wobble.
pub fn targets(xs: &[f64], phase: f64) -> Vec<f64> {
    xs.iter().map(|x| (x - phase).cos() + 0.4 * (2.0 * x).sin() + 0.05 * (17.0 * x + phase).sin()).collect()
}

/// One month of 36 bins on `g` equidistant cubic knots.
pub fn problem(g: usize) -> FitProblem {
    let xs = midpoints(36);
    let ys = targets(&xs, 0.3);
    FitProblem::new(xs, ys, KnotConfig::circular(3, g).expect("valid knots")).expect("well-posed")
}

/// `n` monthly responses regressed on a time trend.
pub fn regression(n: usize) -> RegressionDataset {
    let knots = KnotConfig::circular(3, 9).expect("valid knots");
    let b = DMatrix::from_fn(n, knots.g(), |i, j| ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5 + 0.01 * i as f64);
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { i as f64 + 1.0 });
    RegressionDataset::new(b, x, knots).expect("full rank")
}
