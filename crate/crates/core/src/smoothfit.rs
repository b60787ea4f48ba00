//! Periodic zero-integral smoothing splines and P-splines.
//!
//! Both estimators minimise a quadratic in the reduced coefficients `b̄`:
//!
//! - smoothing spline: `J_l(b̄) = (1-α) ∫ (s^{(l)})² + α Σ w_i (y_i - s(x_i))²`,
//!   giving `G = Uᵀ[(1-α) S_lᵀ M_kl S_l + α CᵀWC]U` and `g = α UᵀCᵀWy`;
//! - P-spline: `J(b̄) = (y - CUb̄)ᵀW(y - CUb̄) + ρ ‖D_d b̄‖²`,
//!   giving `G_P = UᵀCᵀWCU + ρ D_dᵀD_d` and `g_P = UᵀCᵀWy`.
//!
//! The minimiser solves `G b̄ = g`; the parameter is chosen by GCV.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::json;

use crate::linalg::{rank, symmetrize, SpdFactor};
use crate::splinecore::{
    derivative_operator, gram_matrix, penalty_difference, DesignMatrices, KnotConfig,
    PeriodicSplineZ,
};
use crate::{Error, Result};

/// Points in the coarse parameter scan before golden-section refinement.
pub const SCAN_POINTS: usize = 101;
/// Logit range scanned for `α`.
pub const LOGIT_ALPHA_RANGE: (f64, f64) = (-20.0, 20.0);
/// `log10 ρ` range scanned for `ρ`.
pub const LOG10_RHO_RANGE: (f64, f64) = (-8.0, 8.0);
/// Width of the final golden-section bracket, in the scan variable.
pub const REFINE_TOL: f64 = 1e-6;

/// Data, weights and knots of one fit.
#[derive(Debug, Clone)]
pub struct FitProblem {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ws: Vec<f64>,
    knots: KnotConfig,
    design: DesignMatrices,
    /// `C·U`, `n × g`.
    cu: DMatrix<f64>,
    /// `UᵀCᵀWCU`.
    data_gram: DMatrix<f64>,
    /// `UᵀCᵀWy`.
    data_rhs: DVector<f64>,
}

impl FitProblem {
    /// Unit weights.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, knots: KnotConfig) -> Result<Self> {
        let n = xs.len();
        Self::with_weights(xs, ys, vec![1.0; n], knots)
    }

    pub fn with_weights(xs: Vec<f64>, ys: Vec<f64>, ws: Vec<f64>, knots: KnotConfig) -> Result<Self> {
        let n = xs.len();
        if ys.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: ys.len() });
        }
        if ws.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: ws.len() });
        }
        if n < knots.g() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{n} data points for {} inner knots; need n >= g + 1",
                knots.g()
            )));
        }
        if ws.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidArgument("targets must be finite".into()));
        }
        let design = DesignMatrices::new(&knots, &xs)?;
        let cu = &design.collocation * &design.u;
        let required = knots.n_reduced();
        let r = rank(&cu, 1e-10);
        if r < required {
            return Err(Error::SchoenbergWhitney { rank: r, required });
        }
        let wcu = DMatrix::from_fn(n, required, |i, j| ws[i] * cu[(i, j)]);
        let mut data_gram = cu.transpose() * &wcu;
        symmetrize(&mut data_gram);
        let wy = DVector::from_fn(n, |i, _| ws[i] * ys[i]);
        let data_rhs = cu.transpose() * wy;
        Ok(Self { xs, ys, ws, knots, design, cu, data_gram, data_rhs })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn ws(&self) -> &[f64] {
        &self.ws
    }

    pub fn knots(&self) -> &KnotConfig {
        &self.knots
    }

    pub fn design(&self) -> &DesignMatrices {
        &self.design
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    /// Same abscissae, weights and knots with new targets.
    pub fn with_targets(&self, ys: Vec<f64>) -> Result<Self> {
        if ys.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: ys.len() });
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidArgument("targets must be finite".into()));
        }
        let wy = DVector::from_fn(self.n(), |i, _| self.ws[i] * ys[i]);
        let data_rhs = self.cu.transpose() * wy;
        Ok(Self { ys, data_rhs, ..self.clone() })
    }

    fn smoothing_penalty(&self, l: usize) -> Result<DMatrix<f64>> {
        let s = derivative_operator(&self.knots, l)?;
        let m = gram_matrix(&self.knots, l)?;
        let su = s * &self.design.u;
        let mut pen = su.transpose() * m * su;
        symmetrize(&mut pen);
        Ok(pen)
    }

    fn difference_penalty(&self, c: &PSplineConfig) -> Result<DMatrix<f64>> {
        let d = penalty_difference(&self.knots, c.d, c.cyclic)?;
        let mut pen = d.transpose() * d;
        symmetrize(&mut pen);
        Ok(pen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingConfig {
    pub alpha: f64,
    pub l: usize,
}

impl SmoothingConfig {
    pub fn new(alpha: f64, l: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if l == 0 {
            return Err(Error::InvalidArgument("derivative order l must be >= 1".into()));
        }
        Ok(Self { alpha, l })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PSplineConfig {
    pub rho: f64,
    pub d: usize,
    pub cyclic: bool,
}

impl PSplineConfig {
    pub fn new(rho: f64, d: usize) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("difference order d must be >= 1".into()));
        }
        Ok(Self { rho, d, cyclic: false })
    }

    /// Wrap-around differences of the periodic coefficients.
    pub fn cyclic(mut self, cyclic: bool) -> Self {
        self.cyclic = cyclic;
        self
    }
}

/// Which roughness penalty produced a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Smoothing(SmoothingConfig),
    PSpline(PSplineConfig),
}

impl Penalty {
    pub fn kind(&self) -> &'static str {
        match self {
            Penalty::Smoothing(_) => "smoothing",
            Penalty::PSpline(_) => "pspline",
        }
    }

    /// `α` or `ρ`.
    pub fn parameter(&self) -> f64 {
        match self {
            Penalty::Smoothing(c) => c.alpha,
            Penalty::PSpline(c) => c.rho,
        }
    }

    /// `(1-α)/α` for smoothing splines, `ρ` for P-splines.
    pub fn smoothing_effect(&self) -> f64 {
        match self {
            Penalty::Smoothing(c) => (1.0 - c.alpha) / c.alpha,
            Penalty::PSpline(c) => c.rho,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub spline: PeriodicSplineZ,
    pub penalty: Penalty,
    /// Unweighted `Σ (y_i - s(x_i))²`.
    pub sse: f64,
    /// GCV value; infinite when `trace(H) >= n`.
    pub gcv: f64,
    pub hat_trace: f64,
    pub fitted: Vec<f64>,
}

impl FitResult {
    pub fn parameter(&self) -> f64 {
        self.penalty.parameter()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let finite = |v: f64| if v.is_finite() { json!(v) } else { serde_json::Value::Null };
        let k = self.spline.knots().degree();
        let mut obj = json!({
            "variant": self.penalty.kind(),
            "k": k,
        });
        let map = obj.as_object_mut().expect("object literal");
        match self.penalty {
            Penalty::Smoothing(c) => {
                map.insert("l".into(), json!(c.l));
                map.insert("alpha".into(), json!(c.alpha));
            }
            Penalty::PSpline(c) => {
                map.insert("d".into(), json!(c.d));
                map.insert("rho".into(), json!(c.rho));
                map.insert("cyclic".into(), json!(c.cyclic));
            }
        }
        map.insert("gcv".into(), finite(self.gcv));
        map.insert("sse".into(), json!(self.sse));
        map.insert("hat_trace".into(), json!(self.hat_trace));
        map.insert("spline".into(), self.spline.to_json());
        obj
    }
}

/// Assembled normal equations `G b̄ = g` and the factor in front of `H`.
struct System {
    g_mat: DMatrix<f64>,
    rhs: DVector<f64>,
    hat_scale: f64,
}

fn smoothing_system(p: &FitProblem, c: &SmoothingConfig) -> Result<System> {
    SmoothingConfig::new(c.alpha, c.l)?;
    let pen = p.smoothing_penalty(c.l)?;
    Ok(smoothing_system_with(p, c, &pen))
}

fn smoothing_system_with(p: &FitProblem, c: &SmoothingConfig, pen: &DMatrix<f64>) -> System {
    let mut g_mat = pen * (1.0 - c.alpha) + &p.data_gram * c.alpha;
    symmetrize(&mut g_mat);
    System { g_mat, rhs: &p.data_rhs * c.alpha, hat_scale: c.alpha }
}

fn pspline_system(p: &FitProblem, c: &PSplineConfig) -> Result<System> {
    PSplineConfig::new(c.rho, c.d)?;
    let pen = p.difference_penalty(c)?;
    Ok(pspline_system_with(p, c, &pen))
}

fn pspline_system_with(p: &FitProblem, c: &PSplineConfig, pen: &DMatrix<f64>) -> System {
    let mut g_mat = &p.data_gram + pen * c.rho;
    symmetrize(&mut g_mat);
    System { g_mat, rhs: p.data_rhs.clone(), hat_scale: 1.0 }
}

/// `G` and `g` of the smoothing-spline functional.
pub fn assemble_g(p: &FitProblem, c: &SmoothingConfig) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let sys = smoothing_system(p, c)?;
    SpdFactor::new(&sys.g_mat)?;
    Ok((sys.g_mat, sys.rhs))
}

/// `G_P` and `g_P` of the P-spline functional.
pub fn assemble_g_pspline(p: &FitProblem, c: &PSplineConfig) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let sys = pspline_system(p, c)?;
    SpdFactor::new(&sys.g_mat)?;
    Ok((sys.g_mat, sys.rhs))
}

fn hat_from(p: &FitProblem, factor: &SpdFactor, scale: f64) -> DMatrix<f64> {
    // H = scale · CU G⁻¹ (CU)ᵀ W
    let n = p.n();
    let cut_w = DMatrix::from_fn(p.cu.ncols(), n, |j, i| p.cu[(i, j)] * p.ws[i]);
    &p.cu * factor.solve_mat(&cut_w) * scale
}

fn gcv_value(sse: f64, trace: f64, n: usize) -> f64 {
    let nf = n as f64;
    let denom = 1.0 - trace / nf;
    if trace >= nf || denom <= 0.0 {
        f64::INFINITY
    } else {
        sse / nf / (denom * denom)
    }
}

fn solve_system(p: &FitProblem, sys: System, penalty: Penalty) -> Result<FitResult> {
    let factor = SpdFactor::new(&sys.g_mat)?;
    let coeffs = factor.solve(&sys.rhs);
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite spline coefficients".into()));
    }
    let fitted_vec = &p.cu * &coeffs;
    let fitted: Vec<f64> = fitted_vec.iter().copied().collect();
    let sse = p.ys.iter().zip(&fitted).map(|(y, f)| (y - f).powi(2)).sum();
    let hat = hat_from(p, &factor, sys.hat_scale);
    let hat_trace = hat.trace();
    let gcv = gcv_value(sse, hat_trace, p.n());
    let spline = PeriodicSplineZ::new(p.knots.clone(), coeffs)?;
    Ok(FitResult { spline, penalty, sse, gcv, hat_trace, fitted })
}

/// Periodic zero-integral smoothing spline, `b̄* = G⁻¹g`.
pub fn solve_smoothing(p: &FitProblem, c: &SmoothingConfig) -> Result<FitResult> {
    let sys = smoothing_system(p, c)?;
    solve_system(p, sys, Penalty::Smoothing(*c))
}

/// Periodic zero-integral P-spline, `b̄*_P = G_P⁻¹g_P`.
pub fn solve_pspline(p: &FitProblem, c: &PSplineConfig) -> Result<FitResult> {
    let sys = pspline_system(p, c)?;
    solve_system(p, sys, Penalty::PSpline(*c))
}

pub fn solve(p: &FitProblem, penalty: &Penalty) -> Result<FitResult> {
    match penalty {
        Penalty::Smoothing(c) => solve_smoothing(p, c),
        Penalty::PSpline(c) => solve_pspline(p, c),
    }
}

/// `H(α) = α·CU G⁻¹ UᵀCᵀW`.
pub fn hat_matrix(p: &FitProblem, c: &SmoothingConfig) -> Result<DMatrix<f64>> {
    let sys = smoothing_system(p, c)?;
    let factor = SpdFactor::new(&sys.g_mat)?;
    Ok(hat_from(p, &factor, sys.hat_scale))
}

/// `H_P(ρ) = CU G_P⁻¹ UᵀCᵀW`.
pub fn hat_matrix_p(p: &FitProblem, c: &PSplineConfig) -> Result<DMatrix<f64>> {
    let sys = pspline_system(p, c)?;
    let factor = SpdFactor::new(&sys.g_mat)?;
    Ok(hat_from(p, &factor, sys.hat_scale))
}

fn finite_gcv(fit: &FitResult, n: usize) -> Result<f64> {
    if fit.gcv.is_finite() {
        Ok(fit.gcv)
    } else {
        Err(Error::DegenerateGcv { trace: fit.hat_trace, n })
    }
}

/// `GCV(α) = (1/n)·SSE / (1 - tr H(α)/n)²`.
pub fn gcv(p: &FitProblem, c: &SmoothingConfig) -> Result<f64> {
    finite_gcv(&solve_smoothing(p, c)?, p.n())
}

pub fn gcv_p(p: &FitProblem, c: &PSplineConfig) -> Result<f64> {
    finite_gcv(&solve_pspline(p, c)?, p.n())
}

/// Unweighted sum of squared residuals of a fit.
pub fn sse(fit: &FitResult, p: &FitProblem) -> f64 {
    p.ys.iter().zip(&fit.fitted).map(|(y, f)| (y - f).powi(2)).sum()
}

/// `J_l(b̄) = b̄ᵀGb̄ - 2b̄ᵀg + α yᵀWy`.
pub fn objective_smoothing(p: &FitProblem, c: &SmoothingConfig, coeffs: &DVector<f64>) -> Result<f64> {
    let sys = smoothing_system(p, c)?;
    let ywy: f64 = p.ys.iter().zip(&p.ws).map(|(y, w)| w * y * y).sum();
    Ok(coeffs.dot(&(&sys.g_mat * coeffs)) - 2.0 * coeffs.dot(&sys.rhs) + c.alpha * ywy)
}

/// P-spline objective `(y - CUb̄)ᵀW(y - CUb̄) + ρ‖D_d b̄‖²`.
pub fn objective_pspline(p: &FitProblem, c: &PSplineConfig, coeffs: &DVector<f64>) -> Result<f64> {
    let d = penalty_difference(&p.knots, c.d, c.cyclic)?;
    let resid = DVector::from_column_slice(&p.ys) - &p.cu * coeffs;
    let wr: f64 = resid.iter().zip(&p.ws).map(|(r, w)| w * r * r).sum();
    Ok(wr + c.rho * (d * coeffs).norm_squared())
}

/// Grid scan in a transformed variable followed by golden-section refinement.
///
/// Returns the best point seen, so the result never loses to a grid point.
fn scan_and_refine<F>(range: (f64, f64), mut eval: F) -> Result<(f64, FitResult)>
where
    F: FnMut(f64) -> Result<FitResult>,
{
    let (lo, hi) = range;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let ts: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + i as f64 * step).collect();
    let mut scores = vec![f64::NAN; SCAN_POINTS];
    let mut best: Option<(usize, FitResult)> = None;
    for (i, &t) in ts.iter().enumerate() {
        let Ok(fit) = eval(t) else { continue };
        if !fit.gcv.is_finite() {
            continue;
        }
        scores[i] = fit.gcv;
        if best.as_ref().is_none_or(|(_, b)| fit.gcv < b.gcv) {
            best = Some((i, fit));
        }
    }
    let (ib, best_fit) =
        best.ok_or_else(|| Error::Numerical("GCV is not finite anywhere on the scan".into()))?;
    let mut best_t = ts[ib];
    let mut best_fit = best_fit;

    let mut a = ts[ib.saturating_sub(1)];
    let mut b = ts[(ib + 1).min(SCAN_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let score = |fit: &Result<FitResult>| match fit {
        Ok(f) if f.gcv.is_finite() => f.gcv,
        _ => f64::INFINITY,
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while b - a > REFINE_TOL {
        if score(&fc) <= score(&fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    for (t, fit) in [(c, fc), (d, fd)] {
        if let Ok(fit) = fit {
            if fit.gcv.is_finite() && fit.gcv < best_fit.gcv {
                best_t = t;
                best_fit = fit;
            }
        }
    }
    Ok((best_t, best_fit))
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// GCV-optimal `α ∈ (0, 1)` on a logit scale.
pub fn optimize_alpha(p: &FitProblem, l: usize) -> Result<(f64, FitResult)> {
    let pen = p.smoothing_penalty(l)?;
    let (_, fit) = scan_and_refine(LOGIT_ALPHA_RANGE, |t| {
        let c = SmoothingConfig::new(logistic(t), l)?;
        solve_system(p, smoothing_system_with(p, &c, &pen), Penalty::Smoothing(c))
    })?;
    Ok((fit.parameter(), fit))
}

/// GCV-optimal `ρ` on a `log10` scale over `[1e-8, 1e8]`.
pub fn optimize_rho(p: &FitProblem, d: usize, cyclic: bool) -> Result<(f64, FitResult)> {
    let template = PSplineConfig::new(1.0, d)?.cyclic(cyclic);
    let pen = p.difference_penalty(&template)?;
    let (_, fit) = scan_and_refine(LOG10_RHO_RANGE, |t| {
        let c = PSplineConfig::new(10f64.powf(t), d)?.cyclic(cyclic);
        solve_system(p, pspline_system_with(p, &c, &pen), Penalty::PSpline(c))
    })?;
    Ok((fit.parameter(), fit))
}

/// The `α` values of the coarse scan, for reporting.
pub fn alpha_scan_grid() -> Vec<f64> {
    let (lo, hi) = LOGIT_ALPHA_RANGE;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    (0..SCAN_POINTS).map(|i| logistic(lo + i as f64 * step)).collect()
}

/// The `ρ` values of the coarse scan, for reporting.
pub fn rho_scan_grid() -> Vec<f64> {
    let (lo, hi) = LOG10_RHO_RANGE;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    (0..SCAN_POINTS).map(|i| 10f64.powf(lo + i as f64 * step)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussRule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn bin_midpoints(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) * TAU / n as f64).collect()
    }

    fn random_problem(seed: u64, n: usize) -> FitProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let knots = KnotConfig::circular(3, 9).unwrap();
        let xs = bin_midpoints(n);
        let ys: Vec<f64> = xs.iter().map(|x| x.cos() + 0.5 * (2.0 * x).sin() + 0.3 * (rng.random::<f64>() - 0.5)).collect();
        FitProblem::new(xs, ys, knots).unwrap()
    }

    /// J_l evaluated from the spline itself: squared-derivative integral by
    /// per-interval Gauss-Legendre, residuals by point evaluation.
    fn direct_objective(p: &FitProblem, c: &SmoothingConfig, coeffs: &DVector<f64>) -> f64 {
        let s = PeriodicSplineZ::new(p.knots().clone(), coeffs.clone()).unwrap();
        let rule = GaussRule::new(8);
        let mut rough = 0.0;
        for j in 0..=p.knots().g() {
            let (lo, hi) = (p.knots().knot(j as isize), p.knots().knot(j as isize + 1));
            rough += rule.integrate(lo, hi, |x| s.eval_derivative(x, c.l).unwrap().powi(2));
        }
        let fit: f64 = p
            .xs()
            .iter()
            .zip(p.ys())
            .zip(p.ws())
            .map(|((x, y), w)| w * (y - s.eval(*x).unwrap()).powi(2))
            .sum();
        (1.0 - c.alpha) * rough + c.alpha * fit
    }

    #[test]
    fn g_is_symmetric_and_quadratic_form_matches() {
        let p = random_problem(1, 36);
        let c = SmoothingConfig::new(0.8, 2).unwrap();
        let (g, _) = assemble_g(&p, &c).unwrap();
        assert_eq!(g, g.transpose());
        let b = DVector::from_fn(9, |i, _| (i as f64 * 0.7).cos());
        let q = objective_smoothing(&p, &c, &b).unwrap();
        let direct = direct_objective(&p, &c, &b);
        assert!((q - direct).abs() < 1e-10 * direct.abs().max(1.0), "{q} vs {direct}");
    }

    #[test]
    fn hessian_is_twice_g() {
        let p = random_problem(2, 36);
        let c = SmoothingConfig::new(0.6, 1).unwrap();
        let (g, _) = assemble_g(&p, &c).unwrap();
        let b0 = DVector::from_fn(9, |i, _| (i as f64).sin());
        let h = 1e-3;
        for i in 0..9 {
            for j in 0..9 {
                let f = |di: f64, dj: f64| {
                    let mut b = b0.clone();
                    b[i] += di;
                    b[j] += dj;
                    direct_objective(&p, &c, &b)
                };
                let fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                assert!((fd - 2.0 * g[(i, j)]).abs() < 1e-5 * (2.0 * g[(i, j)]).abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_spline() {
        let p = random_problem(3, 36).with_targets(vec![0.0; 36]).unwrap();
        let fit = solve_smoothing(&p, &SmoothingConfig::new(0.9, 1).unwrap()).unwrap();
        assert!(fit.spline.coeffs_reduced().amax() == 0.0);
        assert_eq!(fit.sse, 0.0);
    }

    #[test]
    fn solution_solves_linear_system_and_is_minimal() {
        let p = random_problem(4, 36);
        let c = SmoothingConfig::new(0.93, 1).unwrap();
        let fit = solve_smoothing(&p, &c).unwrap();
        let (g, rhs) = assemble_g(&p, &c).unwrap();
        let b = fit.spline.coeffs_reduced();
        let resid = (&g * b - &rhs).norm() / rhs.norm();
        assert!(resid < 1e-10);
        let j0 = objective_smoothing(&p, &c, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let delta = DVector::from_fn(9, |_, _| 1e-3 * (rng.random::<f64>() - 0.5));
            assert!(objective_smoothing(&p, &c, &(b + delta)).unwrap() >= j0);
        }
    }

    #[test]
    fn planted_spline_recovered_near_interpolation() {
        let knots = KnotConfig::circular(3, 9).unwrap();
        let truth = DVector::from_fn(9, |i, _| ((i * 3 % 7) as f64 - 3.0) * 0.4);
        let s0 = PeriodicSplineZ::new(knots.clone(), truth.clone()).unwrap();
        let xs = bin_midpoints(36);
        let ys = s0.eval_many(&xs).unwrap();
        let p = FitProblem::new(xs, ys, knots).unwrap();
        let fit = solve_smoothing(&p, &SmoothingConfig::new(1.0 - 1e-9, 1).unwrap()).unwrap();
        assert!((fit.spline.coeffs_reduced() - truth).amax() < 1e-5);
    }

    #[test]
    fn fitted_equals_hat_times_y() {
        let p = random_problem(5, 36);
        let y = DVector::from_column_slice(p.ys());
        let c = SmoothingConfig::new(0.7, 2).unwrap();
        let fit = solve_smoothing(&p, &c).unwrap();
        let h = hat_matrix(&p, &c).unwrap();
        assert!((h * &y - DVector::from_column_slice(&fit.fitted)).amax() < 1e-11);
        assert!(fit.hat_trace > 0.0 && fit.hat_trace < 36.0);

        let cp = PSplineConfig::new(0.3, 2).unwrap();
        let fit = solve_pspline(&p, &cp).unwrap();
        let h = hat_matrix_p(&p, &cp).unwrap();
        assert!((h * &y - DVector::from_column_slice(&fit.fitted)).amax() < 1e-11);
    }

    #[test]
    fn pspline_limits() {
        let p = random_problem(6, 36);
        // vanishing penalty approaches unpenalized least squares in the space
        let ls = {
            let g = p.data_gram.clone();
            g.cholesky().unwrap().solve(&p.data_rhs)
        };
        let fit = solve_pspline(&p, &PSplineConfig::new(1e-10, 1).unwrap()).unwrap();
        assert!((fit.spline.coeffs_reduced() - &ls).amax() < 1e-7);
        // enormous first-difference penalty equalizes the reduced coefficients
        let fit = solve_pspline(&p, &PSplineConfig::new(1e12, 1).unwrap()).unwrap();
        let b = fit.spline.coeffs_reduced();
        let spread = b.max() - b.min();
        assert!(spread < 1e-8, "spread {spread}");
    }

    #[test]
    fn interpolatory_trace_tends_to_g() {
        let knots = KnotConfig::circular(3, 9).unwrap();
        // at interval midpoints the even-count periodic cubic case is singular
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * TAU / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let p = FitProblem::new(xs, ys, knots).unwrap();
        let fit = solve_pspline(&p, &PSplineConfig::new(1e-9, 1).unwrap()).unwrap();
        assert!((fit.hat_trace - 9.0).abs() < 1e-6, "{}", fit.hat_trace);
    }

    #[test]
    fn gcv_matches_formula_and_orders() {
        let p = random_problem(7, 36);
        let c = SmoothingConfig::new(0.9, 1).unwrap();
        let fit = solve_smoothing(&p, &c).unwrap();
        let h = hat_matrix(&p, &c).unwrap();
        let n = 36.0;
        let want = fit.sse / n / (1.0 - h.trace() / n).powi(2);
        assert!((gcv(&p, &c).unwrap() - want).abs() < 1e-12);
        // SSE/n when trace(H) = 0
        assert_eq!(gcv_value(3.6, 0.0, 36), 0.1);
        assert!(gcv_value(1.0, 36.0, 36).is_infinite());
    }

    #[test]
    fn optimized_alpha_dominates_scan() {
        let p = random_problem(8, 36);
        let (alpha, fit) = optimize_alpha(&p, 1).unwrap();
        assert!(alpha > 0.0 && alpha < 1.0);
        for a in alpha_scan_grid() {
            if let Ok(v) = gcv(&p, &SmoothingConfig::new(a, 1).unwrap()) {
                assert!(fit.gcv <= v, "alpha {a}: {v} < {}", fit.gcv);
            }
        }
        let (alpha2, _) = optimize_alpha(&p, 1).unwrap();
        assert_eq!(alpha.to_bits(), alpha2.to_bits());
    }

    #[test]
    fn optimized_rho_dominates_scan() {
        let p = random_problem(10, 36);
        for d in 1..=2 {
            let (rho, fit) = optimize_rho(&p, d, false).unwrap();
            assert!(rho > 0.0);
            for r in rho_scan_grid() {
                if let Ok(v) = gcv_p(&p, &PSplineConfig::new(r, d).unwrap()) {
                    assert!(fit.gcv <= v);
                }
            }
        }
        assert!(optimize_rho(&p, 1, true).is_ok());
    }

    #[test]
    fn fits_stay_periodic_with_zero_integral() {
        let p = random_problem(11, 36);
        let fits = [
            solve_smoothing(&p, &SmoothingConfig::new(0.927, 1).unwrap()).unwrap(),
            solve_smoothing(&p, &SmoothingConfig::new(0.99, 2).unwrap()).unwrap(),
            solve_pspline(&p, &PSplineConfig::new(0.07, 1).unwrap()).unwrap(),
            solve_pspline(&p, &PSplineConfig::new(0.041, 2).unwrap().cyclic(true)).unwrap(),
        ];
        for fit in &fits {
            let s = &fit.spline;
            assert!(s.integral().abs() < 1e-10);
            for l in 0..3 {
                let d = s.eval_derivative(0.0, l).unwrap() - s.eval_derivative(TAU, l).unwrap();
                assert!(d.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn problem_validation() {
        let knots = KnotConfig::circular(3, 9).unwrap();
        assert!(FitProblem::new(bin_midpoints(9), vec![0.0; 9], knots.clone()).is_err());
        assert!(FitProblem::new(bin_midpoints(10), vec![0.0; 9], knots.clone()).is_err());
        assert!(FitProblem::with_weights(bin_midpoints(10), vec![0.0; 10], vec![0.0; 10], knots.clone()).is_err());
        let clustered: Vec<f64> = (0..20).map(|i| 0.001 * i as f64).collect();
        assert!(matches!(
            FitProblem::new(clustered, vec![0.0; 20], knots.clone()),
            Err(Error::SchoenbergWhitney { .. })
        ));
        assert!(SmoothingConfig::new(0.0, 1).is_err());
        assert!(SmoothingConfig::new(1.0, 1).is_err());
        assert!(PSplineConfig::new(0.0, 1).is_err());
        let p = random_problem(12, 36);
        assert!(solve_smoothing(&p, &SmoothingConfig::new(0.5, 3).unwrap()).is_err());
        assert!(solve_pspline(&p, &PSplineConfig::new(0.5, 9).unwrap()).is_err());
    }

    #[test]
    fn json_layout() {
        let p = random_problem(13, 36);
        let fit = solve_pspline(&p, &PSplineConfig::new(0.5, 2).unwrap()).unwrap();
        let v = fit.to_json();
        assert_eq!(v["variant"], "pspline");
        assert_eq!(v["d"], 2);
        assert_eq!(v["k"], 3);
        assert!(v["rho"].as_f64().is_some());
        let back = PeriodicSplineZ::from_json(v["spline"].clone()).unwrap();
        assert_eq!(&back, &fit.spline);
    }
}
