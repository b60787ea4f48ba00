use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::basis::{basis_integrals, nonzero_basis};
use super::matrices::{matrix_u, raw_derivative_operator};
use super::KnotConfig;
use crate::{Error, Result};

/// Tolerance for the stored full coefficients when a spline is loaded.
const FULL_COEFF_TOL: f64 = 1e-10;

/// A periodic spline with zero integral, `s(x) = C(x)·K·P·b̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSplineZ {
    knots: KnotConfig,
    reduced: DVector<f64>,
    full: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct SplineJson {
    #[serde(flatten)]
    knots: KnotConfig,
    coeffs_reduced: Vec<f64>,
    coeffs_full: Vec<f64>,
}

impl PeriodicSplineZ {
    pub fn new(knots: KnotConfig, coeffs_reduced: DVector<f64>) -> Result<Self> {
        if coeffs_reduced.len() != knots.n_reduced() {
            return Err(Error::DimensionMismatch {
                expected: knots.n_reduced(),
                got: coeffs_reduced.len(),
            });
        }
        if coeffs_reduced.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("spline coefficients must be finite".into()));
        }
        let full = matrix_u(&knots) * &coeffs_reduced;
        Ok(Self { knots, reduced: coeffs_reduced, full })
    }

    pub fn from_slice(knots: KnotConfig, coeffs_reduced: &[f64]) -> Result<Self> {
        Self::new(knots, DVector::from_column_slice(coeffs_reduced))
    }

    pub fn zero(knots: KnotConfig) -> Self {
        let g = knots.n_reduced();
        Self::new(knots, DVector::zeros(g)).expect("zero vector has the right length")
    }

    pub fn knots(&self) -> &KnotConfig {
        &self.knots
    }

    pub fn coeffs_reduced(&self) -> &DVector<f64> {
        &self.reduced
    }

    pub fn coeffs_full(&self) -> &DVector<f64> {
        &self.full
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        eval_full(&self.knots, self.full.as_slice(), x)
    }

    /// Evaluates after reducing `x` into `[a, b)` modulo the period.
    pub fn eval_wrapped(&self, x: f64) -> f64 {
        let a = self.knots.a();
        let mut t = a + (x - a).rem_euclid(self.knots.period());
        if t > self.knots.b() {
            t = self.knots.b();
        }
        self.eval(t).expect("wrapped abscissa lies in the domain")
    }

    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// `l`-th derivative through `S_l` and the degree-`(k-l)` basis, `0 ≤ l < k`.
    pub fn eval_derivative(&self, x: f64, l: usize) -> Result<f64> {
        let k = self.knots.degree();
        if l == 0 {
            return self.eval(x);
        }
        if l >= k {
            return Err(Error::InvalidArgument(format!(
                "derivative order {l} outside 0..{k}"
            )));
        }
        let coeffs = raw_derivative_operator(&self.knots, l) * &self.full;
        eval_with_order(&self.knots, coeffs.as_slice(), k + 1 - l, x)
    }

    /// Closed-form integral over `[a, b]`; zero up to rounding by construction.
    pub fn integral(&self) -> f64 {
        spline_integral(self.full.as_slice(), &self.knots).expect("length fixed at construction")
    }

    /// Scaled copy `c·s`, still in the zero-integral periodic space.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.knots.clone(), &self.reduced * c).expect("same dimension")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("spline serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(value)?)
    }
}

impl Serialize for PeriodicSplineZ {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SplineJson {
            knots: self.knots.clone(),
            coeffs_reduced: self.reduced.iter().copied().collect(),
            coeffs_full: self.full.iter().copied().collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PeriodicSplineZ {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SplineJson::deserialize(de)?;
        let spline = PeriodicSplineZ::from_slice(raw.knots, &raw.coeffs_reduced)
            .map_err(D::Error::custom)?;
        if raw.coeffs_full.len() != spline.full.len() {
            return Err(D::Error::custom(format!(
                "coeffs_full has length {}, expected {}",
                raw.coeffs_full.len(),
                spline.full.len()
            )));
        }
        let worst = raw
            .coeffs_full
            .iter()
            .zip(spline.full.iter())
            .map(|(s, r)| (s - r).abs())
            .fold(0.0, f64::max);
        if !(worst <= FULL_COEFF_TOL) {
            return Err(D::Error::custom(format!(
                "coeffs_full disagrees with K·P·coeffs_reduced by {worst:.3e}"
            )));
        }
        Ok(spline)
    }
}

fn eval_with_order(cfg: &KnotConfig, coeffs: &[f64], order: usize, x: f64) -> Result<f64> {
    let span = cfg.span(x)?;
    let vals = nonzero_basis(cfg, order, span, x);
    Ok(vals.iter().enumerate().map(|(s, v)| v * coeffs[span + s]).sum())
}

/// Degree-`k` spline with arbitrary full coefficients (`g + k + 1` of them).
pub fn eval_full(cfg: &KnotConfig, coeffs_full: &[f64], x: f64) -> Result<f64> {
    if coeffs_full.len() != cfg.n_full() {
        return Err(Error::DimensionMismatch { expected: cfg.n_full(), got: coeffs_full.len() });
    }
    eval_with_order(cfg, coeffs_full, cfg.degree() + 1, x)
}

pub fn eval_spline(s: &PeriodicSplineZ, x: f64) -> Result<f64> {
    s.eval(x)
}

pub fn eval_derivative(s: &PeriodicSplineZ, x: f64, l: usize) -> Result<f64> {
    s.eval_derivative(x, l)
}

/// `∫_a^b Σ b_i B_i(x) dx` for a full coefficient vector.
///
/// For periodic coefficients this reduces to `(1/(k+1)) Σ_{i=-k}^{g-k} b_i (λ_{i+k+1} - λ_i)`;
/// boundary B-splines of non-periodic vectors are integrated over their part inside `[a, b]`.
pub fn spline_integral(coeffs_full: &[f64], cfg: &KnotConfig) -> Result<f64> {
    if coeffs_full.len() != cfg.n_full() {
        return Err(Error::DimensionMismatch { expected: cfg.n_full(), got: coeffs_full.len() });
    }
    let ints = basis_integrals(cfg, cfg.degree() + 1);
    Ok(coeffs_full.iter().zip(&ints).map(|(c, w)| c * w).sum())
}
