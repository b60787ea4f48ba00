//! Circular descriptive statistics and the von Mises distribution.
//!
//! Angles are radians in `[0, 2π)`, taken as stored: the origin and the
//! orientation are the caller's business.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bayes::{DensityCurve, Grid};
use crate::{Error, Result};

/// Resultant lengths at or below this are treated as exactly zero.
pub const ZERO_RESULTANT_TOL: f64 = 1e-12;

/// Series / asymptotic switch point for the modified Bessel functions.
const BESSEL_SWITCH: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CircularSample {
    angles: Vec<f64>,
}

impl CircularSample {
    /// Reduces every angle modulo `2π`.
    pub fn new(angles: impl IntoIterator<Item = f64>) -> Result<Self> {
        let angles: Vec<f64> = angles.into_iter().map(wrap_angle).collect();
        if angles.is_empty() {
            return Err(Error::Empty("circular sample"));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Every angle shifted by `phi`.
    pub fn rotated(&self, phi: f64) -> Self {
        Self { angles: self.angles.iter().map(|a| wrap_angle(a + phi)).collect() }
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// The `p`-th sample trigonometric moment about the zero direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigMoment {
    pub p: i32,
    pub a: f64,
    pub b: f64,
    /// Mean resultant length `R̄_p ∈ [0, 1]`.
    pub resultant_length: f64,
    /// Mean resultant direction in `[0, 2π)`; `None` when `R̄_p` is zero.
    pub direction: Option<f64>,
}

pub fn trig_moment(s: &CircularSample, p: i32) -> TrigMoment {
    let n = s.len() as f64;
    let pf = p as f64;
    let (mut c, mut si) = (0.0, 0.0);
    for &t in &s.angles {
        let (sn, cs) = (pf * t).sin_cos();
        c += cs;
        si += sn;
    }
    let a = c / n;
    let b = si / n;
    let r = a.hypot(b).min(1.0);
    let (resultant_length, direction) = if r <= ZERO_RESULTANT_TOL {
        (0.0, None)
    } else {
        (r, Some(wrap_angle(b.atan2(a))))
    };
    TrigMoment { p, a, b, resultant_length, direction }
}

/// `V = 1 - R̄`.
pub fn circular_variance(s: &CircularSample) -> f64 {
    1.0 - trig_moment(s, 1).resultant_length
}

/// `σ̂ = √(-2 ln(1 - V))`; infinite when `R̄ = 0`.
pub fn circular_sd(s: &CircularSample) -> f64 {
    let r = trig_moment(s, 1).resultant_length;
    if r == 0.0 {
        f64::INFINITY
    } else {
        (-2.0 * r.ln()).max(0.0).sqrt()
    }
}

/// `√(2V)`.
pub fn mean_angular_deviation(s: &CircularSample) -> f64 {
    (2.0 * circular_variance(s)).sqrt()
}

/// Per-sample summary, serialized as the stats report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircularSummary {
    pub n: usize,
    /// Mean direction in degrees as stored; `null` when undefined.
    pub mean_direction_deg: Option<f64>,
    pub mean_resultant_length: f64,
    pub circ_variance: f64,
    /// `null` when infinite.
    pub circ_sd: Option<f64>,
    pub mean_angular_deviation: f64,
}

pub fn summarize(s: &CircularSample) -> CircularSummary {
    let m = trig_moment(s, 1);
    let sd = circular_sd(s);
    CircularSummary {
        n: s.len(),
        mean_direction_deg: m.direction.map(f64::to_degrees),
        mean_resultant_length: m.resultant_length,
        circ_variance: 1.0 - m.resultant_length,
        circ_sd: sd.is_finite().then_some(sd),
        mean_angular_deviation: mean_angular_deviation(s),
    }
}

/// `e^{-x} I_0(x)`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    bessel_scaled(0, x)
}

/// `e^{-x} I_1(x)`.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    bessel_scaled(1, x)
}

pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0_scaled(x) * x.abs().exp()
}

pub fn bessel_i1(x: f64) -> f64 {
    bessel_i1_scaled(x) * x.abs().exp()
}

/// Mean resultant length of a von Mises distribution, `I_1(κ)/I_0(κ)`.
pub fn von_mises_mean_resultant(kappa: f64) -> f64 {
    bessel_i1_scaled(kappa) / bessel_i0_scaled(kappa)
}

fn bessel_scaled(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let sign = if nu == 1 && x < 0.0 { -1.0 } else { 1.0 };
    let v = if ax <= BESSEL_SWITCH { bessel_series(nu, ax) * (-ax).exp() } else { bessel_asymptotic(nu, ax) };
    sign * v
}

fn bessel_series(nu: u32, x: f64) -> f64 {
    // Σ (x/2)^{2j+ν} / (j! (j+ν)!)
    let q = 0.25 * x * x;
    let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for j in 1..500 {
        let jf = j as f64;
        term *= q / (jf * (jf + nu as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn bessel_asymptotic(nu: u32, x: f64) -> f64 {
    // e^{-x} I_ν(x) ~ (2πx)^{-1/2} Σ_k (-1)^k a_k(ν) x^{-k}
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (TAU * x).sqrt()
}

/// `exp(κ cos(θ - μ)) / (2π I_0(κ))`.
pub fn von_mises_pdf(theta: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("von Mises concentration {kappa} must be >= 0")));
    }
    Ok(((kappa * ((theta - mu).cos() - 1.0)).exp()) / (TAU * bessel_i0_scaled(kappa)))
}

/// Von Mises kernel density estimate `(1/n) Σ vM(θ; θ_j, κ)` on a grid.
pub fn von_mises_kde(s: &CircularSample, kappa: f64, grid: &Grid) -> Result<DensityCurve> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("KDE concentration {kappa} must be > 0")));
    }
    let norm = 1.0 / (TAU * bessel_i0_scaled(kappa) * s.len() as f64);
    let values = grid
        .points()
        .iter()
        .map(|&x| {
            s.angles.iter().map(|&t| (kappa * ((x - t).cos() - 1.0)).exp()).sum::<f64>() * norm
        })
        .collect();
    DensityCurve::new(grid.clone(), values)
}

/// Reproducible von Mises sample (Best-Fisher rejection sampling).
pub fn von_mises_sample(seed: u64, mu: f64, kappa: f64, n: usize) -> Result<CircularSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = von_mises_draws(&mut rng, mu, kappa, n)?;
    CircularSample::new(draws)
}

/// Von Mises draws from a caller-supplied generator.
pub fn von_mises_draws<R: Rng + ?Sized>(rng: &mut R, mu: f64, kappa: f64, n: usize) -> Result<Vec<f64>> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("von Mises concentration {kappa} must be >= 0")));
    }
    if n == 0 {
        return Err(Error::Empty("von Mises sample size"));
    }
    let mut out = Vec::with_capacity(n);
    if kappa < 1e-8 {
        for _ in 0..n {
            out.push(wrap_angle(mu + TAU * rng.random::<f64>()));
        }
        return Ok(out);
    }
    let s = 0.5 / kappa;
    let r = s + (1.0 + s * s).sqrt();
    for _ in 0..n {
        let w = loop {
            let u: f64 = rng.random();
            let z = (PI * u).cos();
            let w = (1.0 + r * z) / (r + z);
            let y = kappa * (r - w);
            let v: f64 = rng.random();
            if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
                break w;
            }
        };
        let mut t = w.clamp(-1.0, 1.0).acos();
        if rng.random::<f64>() < 0.5 {
            t = -t;
        }
        out.push(wrap_angle(mu + t));
    }
    Ok(out)
}

/// Outcome of the three circular-density conditions on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub nonnegative: bool,
    pub min_value: f64,
    pub periodic: bool,
    /// `|f(x_1) - f(x_m)|` across the wrap point.
    pub wrap_jump: f64,
    /// Largest jump between neighbouring interior grid points.
    pub max_interior_jump: f64,
    pub normalized: bool,
    /// `∫ f - 1`.
    pub integral_residual: f64,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.nonnegative && self.periodic && self.normalized
    }
}

/// Checks `f ≥ 0`, `f(θ + 2π) = f(θ)` and `∫ f = 1` on gridded values.
///
/// Periodicity on samples means the jump across the wrap point is no larger
/// than the jumps the curve makes elsewhere (up to a factor 1.5 and `tol`).
pub fn validate_circular_values(grid: &Grid, values: &[f64], tol: f64) -> ValidityReport {
    let min_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let m = values.len();
    let wrap_jump = (values[0] - values[m - 1]).abs();
    let max_interior_jump =
        values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let integral_residual = grid.integrate(values) - 1.0;
    ValidityReport {
        nonnegative: min_value >= 0.0,
        min_value,
        periodic: wrap_jump <= 1.5 * max_interior_jump + tol,
        wrap_jump,
        max_interior_jump,
        normalized: integral_residual.abs() <= tol,
        integral_residual,
    }
}

pub fn validate_circular_density(f: &DensityCurve, tol: f64) -> ValidityReport {
    validate_circular_values(f.grid(), f.values(), tol)
}
