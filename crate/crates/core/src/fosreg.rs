//! Function-on-scalar regression with density responses.
//!
//! Each response density is represented by the reduced coefficients `b̄ᵢ` of
//! its clr spline. The functional model `clr(yᵢ) = clr(β₀) + Σⱼ xᵢⱼ clr(βⱼ) + εᵢ`
//! then becomes the multivariate linear model `B = X·Beta + E`, fitted by
//! column-wise least squares. Every row of `Beta` is again a zero-integral
//! periodic spline.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bayes::{clr_inverse, ClrCurve, DensityCurve, Grid};
use crate::linalg::rank;
use crate::splinecore::{collocation_matrix, matrix_u, KnotConfig, PeriodicSplineZ};
use crate::{Error, Result};

pub const DEFAULT_REPLICATES: usize = 500;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Smallest replicate count accepted by [`bootstrap_bands`].
pub const MIN_REPLICATES: usize = 100;
/// Largest tolerated fraction of failed bootstrap refits.
pub const MAX_DISCARD_FRACTION: f64 = 0.05;

/// Responses `B` (`n × g`), design `X` (`n × (p+1)`, leading ones) and knots.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    b: DMatrix<f64>,
    x: DMatrix<f64>,
    knots: KnotConfig,
}

impl RegressionDataset {
    /// `x` must already contain the intercept column.
    pub fn new(b: DMatrix<f64>, x: DMatrix<f64>, knots: KnotConfig) -> Result<Self> {
        let n = b.nrows();
        if b.ncols() != knots.n_reduced() {
            return Err(Error::DimensionMismatch { expected: knots.n_reduced(), got: b.ncols() });
        }
        if x.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.nrows() });
        }
        if x.ncols() == 0 || x.column(0).iter().any(|v| *v != 1.0) {
            return Err(Error::InvalidArgument("first design column must be the intercept".into()));
        }
        if n <= x.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{n} responses for {} regression parameters; need n > p + 1",
                x.ncols()
            )));
        }
        if b.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in regression data".into()));
        }
        let r = rank(&x, 1e-10);
        if r < x.ncols() {
            return Err(Error::Singular(format!(
                "design matrix has rank {r} < {} columns",
                x.ncols()
            )));
        }
        Ok(Self { b, x, knots })
    }

    /// Builds `B` from fitted splines and `X` from raw covariates (no intercept).
    pub fn from_splines(responses: &[PeriodicSplineZ], covariates: &[Vec<f64>]) -> Result<Self> {
        let first = responses.first().ok_or(Error::Empty("responses"))?;
        let knots = first.knots().clone();
        if covariates.len() != responses.len() {
            return Err(Error::DimensionMismatch { expected: responses.len(), got: covariates.len() });
        }
        let p = covariates.first().map_or(0, Vec::len);
        let g = knots.n_reduced();
        let mut b = DMatrix::zeros(responses.len(), g);
        let mut x = DMatrix::zeros(responses.len(), p + 1);
        for (i, (s, cov)) in responses.iter().zip(covariates).enumerate() {
            if s.knots() != &knots {
                return Err(Error::InvalidKnots("responses use different knot sequences".into()));
            }
            if cov.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: cov.len() });
            }
            b.row_mut(i).copy_from(&s.coeffs_reduced().transpose());
            x[(i, 0)] = 1.0;
            for (j, v) in cov.iter().enumerate() {
                x[(i, j + 1)] = *v;
            }
        }
        Self::new(b, x, knots)
    }

    pub fn responses(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn knots(&self) -> &KnotConfig {
        &self.knots
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    /// Number of covariates, excluding the intercept.
    pub fn p(&self) -> usize {
        self.x.ncols() - 1
    }
}

/// Least-squares estimate `Beta` and residual coefficients `E = B - X·Beta`.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    beta: DMatrix<f64>,
    residuals: DMatrix<f64>,
    knots: KnotConfig,
}

impl RegressionModel {
    /// `(p+1) × g`; row 0 is the intercept.
    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn residuals(&self) -> &DMatrix<f64> {
        &self.residuals
    }

    pub fn knots(&self) -> &KnotConfig {
        &self.knots
    }

    pub fn n_params(&self) -> usize {
        self.beta.nrows()
    }

    /// `clr(β̂ⱼ)` as a spline.
    pub fn coefficient_spline(&self, j: usize) -> Result<PeriodicSplineZ> {
        if j >= self.beta.nrows() {
            return Err(Error::InvalidArgument(format!("no regression parameter {j}")));
        }
        PeriodicSplineZ::new(self.knots.clone(), self.beta.row(j).transpose())
    }

    /// Spline of the prediction for covariates `x_new` (intercept excluded).
    pub fn predict_spline(&self, x_new: &[f64]) -> Result<PeriodicSplineZ> {
        let p = self.beta.nrows() - 1;
        if x_new.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: x_new.len() });
        }
        let mut coeffs = self.beta.row(0).transpose();
        for (j, v) in x_new.iter().enumerate() {
            coeffs += self.beta.row(j + 1).transpose() * *v;
        }
        PeriodicSplineZ::new(self.knots.clone(), coeffs)
    }
}

/// Column-wise OLS, `Beta = (XᵀX)⁻¹XᵀB`.
pub fn fit_fos(ds: &RegressionDataset) -> Result<RegressionModel> {
    let beta = ols(&ds.x, &ds.b)?;
    let residuals = &ds.b - &ds.x * &beta;
    Ok(RegressionModel { beta, residuals, knots: ds.knots.clone() })
}

fn ols(x: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    // QR keeps the conditioning of X rather than XᵀX
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::Singular("rank-deficient design matrix".into()));
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Singular("rank-deficient design matrix".into()))
}

/// Evaluates a spline on a grid and removes the grid-quadrature residue of
/// its (exactly zero) integral.
fn spline_on_grid(s: &PeriodicSplineZ, grid: &Grid) -> Result<ClrCurve> {
    let values = s.eval_many(grid.points())?;
    ClrCurve::centered(grid.clone(), values)
}

pub fn predict_clr(model: &RegressionModel, x_new: &[f64], grid: &Grid) -> Result<ClrCurve> {
    spline_on_grid(&model.predict_spline(x_new)?, grid)
}

pub fn predict_density(model: &RegressionModel, x_new: &[f64], grid: &Grid) -> Result<DensityCurve> {
    Ok(clr_inverse(&predict_clr(model, x_new, grid)?))
}

/// `clr(β̂ⱼ)` sampled on a grid.
pub fn coefficient_clr(model: &RegressionModel, j: usize, grid: &Grid) -> Result<ClrCurve> {
    spline_on_grid(&model.coefficient_spline(j)?, grid)
}

/// How replicate curves are turned into a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    /// Empirical quantiles at `(1±level)/2` separately at each grid point.
    #[default]
    Pointwise,
    /// `estimate ± c·sd(t)`, with `c` the `level` quantile of the replicate
    /// maxima of `|β̂*(t) - β̂(t)| / sd(t)`; covers the whole curve jointly.
    Simultaneous,
}

/// Bootstrap bands for each `clr(β̂ⱼ)`.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapBands {
    pub kind: BandKind,
    pub grid: Vec<f64>,
    /// Point estimates, one row per parameter.
    pub estimate: Vec<Vec<f64>>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    pub level: f64,
    /// Replicates that entered the quantiles.
    pub replicates: usize,
    pub requested: usize,
    pub discarded: usize,
    pub seed: u64,
}

/// Evaluation matrix mapping reduced coefficients to grid values.
fn evaluation_matrix(knots: &KnotConfig, grid: &Grid) -> Result<DMatrix<f64>> {
    Ok(collocation_matrix(knots, grid.points())? * matrix_u(knots))
}

/// Type-7 sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Residual bootstrap: whole rows of `E` are resampled with replacement,
/// `B* = X·Beta + E*` is refitted and each `clr(β̂ⱼ*)` is evaluated on `grid`.
///
/// Replicate `r` draws from stream `r` of the seeded generator, so the bands
/// do not depend on thread scheduling.
pub fn bootstrap_bands(
    model: &RegressionModel,
    ds: &RegressionDataset,
    replicates: usize,
    level: f64,
    seed: u64,
    grid: &Grid,
) -> Result<BootstrapBands> {
    bootstrap_bands_with(model, ds, replicates, level, seed, grid, BandKind::Pointwise)
}

/// [`bootstrap_bands`] with a chosen band construction.
pub fn bootstrap_bands_with(
    model: &RegressionModel,
    ds: &RegressionDataset,
    replicates: usize,
    level: f64,
    seed: u64,
    grid: &Grid,
    kind: BandKind,
) -> Result<BootstrapBands> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "{replicates} bootstrap replicates; at least {MIN_REPLICATES} required"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level {level} must lie in (0, 1)")));
    }
    if model.beta.ncols() != ds.knots.n_reduced() || model.beta.nrows() != ds.x.ncols() {
        return Err(Error::DimensionMismatch { expected: ds.x.ncols(), got: model.beta.nrows() });
    }
    let phi = evaluation_matrix(&ds.knots, grid)?;
    let fitted = &ds.x * &model.beta;
    let n = ds.n();
    let params = model.beta.nrows();
    // OLS residuals are shrunk by the fitted degrees of freedom; rescaling
    // restores the error variance in the resampled rows.
    let inflate = (n as f64 / (n - params) as f64).sqrt();
    let residuals = &model.residuals * inflate;

    let curves: Vec<Option<DMatrix<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut b_star = fitted.clone();
            for i in 0..n {
                let src = rng.random_range(0..n);
                let mut row = b_star.row_mut(i);
                row += residuals.row(src);
            }
            let beta = ols(&ds.x, &b_star).ok()?;
            let curves = centered_rows(&(beta * phi.transpose()), grid);
            curves.iter().all(|v| v.is_finite()).then_some(curves)
        })
        .collect();

    let kept: Vec<&DMatrix<f64>> = curves.iter().flatten().collect();
    let discarded = replicates - kept.len();
    if discarded as f64 > MAX_DISCARD_FRACTION * replicates as f64 {
        return Err(Error::Numerical(format!(
            "{discarded} of {replicates} bootstrap refits failed"
        )));
    }
    let estimate = centered_rows(&(&model.beta * phi.transpose()), grid);
    let m = grid.len();
    let (lower, upper) = match kind {
        BandKind::Pointwise => pointwise(&kept, params, m, level),
        BandKind::Simultaneous => simultaneous(&kept, &estimate, level),
    };
    Ok(BootstrapBands {
        kind,
        grid: grid.points().to_vec(),
        estimate: (0..params).map(|j| estimate.row(j).iter().copied().collect()).collect(),
        lower,
        upper,
        level,
        replicates: kept.len(),
        requested: replicates,
        discarded,
        seed,
    })
}

fn pointwise(kept: &[&DMatrix<f64>], params: usize, m: usize, level: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (ql, qu) = ((1.0 - level) / 2.0, (1.0 + level) / 2.0);
    let mut lower = vec![vec![0.0; m]; params];
    let mut upper = vec![vec![0.0; m]; params];
    let mut column = Vec::with_capacity(kept.len());
    for j in 0..params {
        for t in 0..m {
            column.clear();
            column.extend(kept.iter().map(|c| c[(j, t)]));
            column.sort_by(f64::total_cmp);
            lower[j][t] = quantile_sorted(&column, ql);
            upper[j][t] = quantile_sorted(&column, qu);
        }
    }
    (lower, upper)
}

fn simultaneous(kept: &[&DMatrix<f64>], estimate: &DMatrix<f64>, level: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (params, m) = estimate.shape();
    let r = kept.len() as f64;
    let mut lower = vec![vec![0.0; m]; params];
    let mut upper = vec![vec![0.0; m]; params];
    for j in 0..params {
        let sd: Vec<f64> = (0..m)
            .map(|t| {
                let mean = kept.iter().map(|c| c[(j, t)]).sum::<f64>() / r;
                (kept.iter().map(|c| (c[(j, t)] - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
            })
            .collect();
        let mut maxima: Vec<f64> = kept
            .iter()
            .map(|c| {
                (0..m)
                    .filter(|&t| sd[t] > 0.0)
                    .map(|t| (c[(j, t)] - estimate[(j, t)]).abs() / sd[t])
                    .fold(0.0, f64::max)
            })
            .collect();
        maxima.sort_by(f64::total_cmp);
        let crit = quantile_sorted(&maxima, level);
        for t in 0..m {
            lower[j][t] = estimate[(j, t)] - crit * sd[t];
            upper[j][t] = estimate[(j, t)] + crit * sd[t];
        }
    }
    (lower, upper)
}

fn centered_rows(values: &DMatrix<f64>, grid: &Grid) -> DMatrix<f64> {
    let mut out = values.clone();
    for mut row in out.row_iter_mut() {
        let v: Vec<f64> = row.iter().copied().collect();
        let mean = grid.mean(&v);
        row.add_scalar_mut(-mean);
    }
    out
}

/// Whether the band of one parameter covers the zero function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Significance {
    pub parameter: usize,
    pub contains_zero_everywhere: bool,
    /// Maximal runs of grid points where the band excludes zero, as `[start, end]`.
    pub exclusion_intervals: Vec<[f64; 2]>,
}

pub fn significance_summary(bands: &BootstrapBands) -> Vec<Significance> {
    bands
        .lower
        .iter()
        .zip(&bands.upper)
        .enumerate()
        .map(|(j, (lo, hi))| {
            let mut intervals = Vec::new();
            let mut start: Option<usize> = None;
            for t in 0..=bands.grid.len() {
                let excludes = t < bands.grid.len() && (lo[t] > 0.0 || hi[t] < 0.0);
                match (excludes, start) {
                    (true, None) => start = Some(t),
                    (false, Some(s)) => {
                        intervals.push([bands.grid[s], bands.grid[t - 1]]);
                        start = None;
                    }
                    _ => {}
                }
            }
            Significance {
                parameter: j,
                contains_zero_everywhere: intervals.is_empty(),
                exclusion_intervals: intervals,
            }
        })
        .collect()
}

/// Regression report with coefficient splines, bands and significance flags.
pub fn report_json(model: &RegressionModel, bands: &BootstrapBands) -> Result<serde_json::Value> {
    let coefficients = (0..model.n_params())
        .map(|j| model.coefficient_spline(j).map(|s| s.to_json()))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "coefficients": coefficients,
        "bands": {
            "grid": bands.grid,
            "estimate": bands.estimate,
            "lower": bands.lower,
            "upper": bands.upper,
            "level": bands.level,
            "kind": bands.kind,
        },
        "replicates": bands.replicates,
        "discarded": bands.discarded,
        "seed": bands.seed,
        "significance": significance_summary(bands),
    }))
}

/// Coefficients `xᵀ_new·Beta` for a covariate vector including the intercept.
pub fn linear_predictor(model: &RegressionModel, x_with_intercept: &DVector<f64>) -> Result<DVector<f64>> {
    if x_with_intercept.len() != model.beta.nrows() {
        return Err(Error::DimensionMismatch { expected: model.beta.nrows(), got: x_with_intercept.len() });
    }
    Ok(model.beta.transpose() * x_with_intercept)
}
