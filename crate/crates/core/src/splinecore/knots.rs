use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Degree, domain and inner knots of a periodic spline space.
///
/// The periodic extension `λ_{-k} ≤ … ≤ λ_{g+k+1}` is computed once at
/// construction and kept alongside the inner knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnotConfigRaw", into = "KnotConfigRaw")]
pub struct KnotConfig {
    a: f64,
    b: f64,
    degree: usize,
    inner: Vec<f64>,
    extended: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct KnotConfigRaw {
    degree: usize,
    interval: [f64; 2],
    inner_knots: Vec<f64>,
}

impl TryFrom<KnotConfigRaw> for KnotConfig {
    type Error = Error;

    fn try_from(raw: KnotConfigRaw) -> Result<Self> {
        KnotConfig::new(raw.interval[0], raw.interval[1], raw.degree, raw.inner_knots)
    }
}

impl From<KnotConfig> for KnotConfigRaw {
    fn from(cfg: KnotConfig) -> Self {
        KnotConfigRaw { degree: cfg.degree, interval: [cfg.a, cfg.b], inner_knots: cfg.inner }
    }
}

impl KnotConfig {
    pub fn new(a: f64, b: f64, degree: usize, inner_knots: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidKnots(format!("interval [{a}, {b}] is empty or not finite")));
        }
        if degree == 0 {
            return Err(Error::InvalidKnots("degree must be at least 1".into()));
        }
        let g = inner_knots.len();
        if g < degree + 1 {
            return Err(Error::InvalidKnots(format!(
                "{g} inner knots for degree {degree}; need at least {}",
                degree + 1
            )));
        }
        if inner_knots.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidKnots("inner knots must be finite".into()));
        }
        if inner_knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKnots("inner knots must be strictly increasing".into()));
        }
        if inner_knots[0] <= a || inner_knots[g - 1] >= b {
            return Err(Error::InvalidKnots(format!(
                "inner knots must lie strictly inside ({a}, {b})"
            )));
        }
        let extended = build_extended(a, b, degree, &inner_knots);
        Ok(Self { a, b, degree, inner: inner_knots, extended })
    }

    /// `g` equidistant inner knots on `[a, b]`.
    pub fn uniform(a: f64, b: f64, degree: usize, g: usize) -> Result<Self> {
        let h = (b - a) / (g as f64 + 1.0);
        let inner = (1..=g).map(|i| a + i as f64 * h).collect();
        Self::new(a, b, degree, inner)
    }

    /// `g` equidistant inner knots on `[0, 2π]`; `g = 9` gives `λ_i = πi/5`.
    pub fn circular(degree: usize, g: usize) -> Result<Self> {
        Self::uniform(0.0, TAU, degree, g)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of inner knots, which is also `dim 𝒵ᵏ_per`.
    pub fn g(&self) -> usize {
        self.inner.len()
    }

    pub fn inner_knots(&self) -> &[f64] {
        &self.inner
    }

    /// `λ_{-k}, …, λ_{g+k+1}`.
    pub fn extended_knots(&self) -> &[f64] {
        &self.extended
    }

    /// `λ_i` for `i ∈ -k..=g+k+1`.
    pub fn knot(&self, i: isize) -> f64 {
        self.extended[(i + self.degree as isize) as usize]
    }

    /// Dimension of the full spline space, `g + k + 1`.
    pub fn n_full(&self) -> usize {
        self.g() + self.degree + 1
    }

    /// Dimension of the periodic spline space, `g + 1`.
    pub fn n_periodic(&self) -> usize {
        self.g() + 1
    }

    /// Dimension of the zero-integral periodic space, `g`.
    pub fn n_reduced(&self) -> usize {
        self.g()
    }

    pub fn period(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Knot interval `j ∈ 0..=g` with `λ_j ≤ x < λ_{j+1}`; `x = b` belongs to the last one.
    pub(crate) fn span(&self, x: f64) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain { x, a: self.a, b: self.b });
        }
        Ok(self.inner.partition_point(|&t| t <= x))
    }
}

fn build_extended(a: f64, b: f64, k: usize, inner: &[f64]) -> Vec<f64> {
    let g = inner.len();
    let period = b - a;
    // λ_0..λ_{g+1}
    let mut base = Vec::with_capacity(g + 2);
    base.push(a);
    base.extend_from_slice(inner);
    base.push(b);

    let mut ext = Vec::with_capacity(g + 2 * k + 2);
    for i in (1..=k).rev() {
        ext.push(base[g + 1 - i] - period);
    }
    ext.extend_from_slice(&base);
    ext.extend(base[1..=k].iter().map(|x| x + period));
    ext
}

/// The periodic knot extension `λ_{-k}, …, λ_{g+k+1}` (length `g + 2k + 2`).
pub fn extend_knots_periodic(cfg: &KnotConfig) -> Vec<f64> {
    cfg.extended.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn paper_grid_boundary_knots() {
        let cfg = KnotConfig::circular(3, 9).unwrap();
        for i in 1..=9 {
            assert!((cfg.inner_knots()[i - 1] - PI * i as f64 / 5.0).abs() < 1e-14);
        }
        assert!((cfg.knot(-1) + PI / 5.0).abs() < 1e-14);
        assert!((cfg.knot(-2) + 2.0 * PI / 5.0).abs() < 1e-14);
        assert!((cfg.knot(-3) + 3.0 * PI / 5.0).abs() < 1e-14);
        assert!((cfg.knot(11) - (2.0 * PI + PI / 5.0)).abs() < 1e-14);
        assert_eq!(extend_knots_periodic(&cfg).len(), 9 + 2 * 3 + 2);
    }

    #[test]
    fn unit_interval_linear() {
        let cfg = KnotConfig::new(0.0, 1.0, 1, vec![0.25, 0.5, 0.75]).unwrap();
        assert_eq!(cfg.knot(-1), -0.25);
        assert_eq!(cfg.knot(5), 1.25);
        assert_eq!(cfg.knot(0), 0.0);
        assert_eq!(cfg.knot(4), 1.0);
    }

    #[test]
    fn interior_is_unchanged_and_mirror_holds() {
        let cfg = KnotConfig::new(-1.0, 3.0, 2, vec![-0.5, 0.1, 0.7, 2.2, 2.9]).unwrap();
        let g = cfg.g() as isize;
        assert_eq!(cfg.knot(0), -1.0);
        assert_eq!(cfg.knot(g + 1), 3.0);
        for i in 1..=g {
            assert_eq!(cfg.knot(i), cfg.inner_knots()[(i - 1) as usize]);
        }
        for i in 1..=2isize {
            assert_eq!(cfg.knot(-i) + cfg.period(), cfg.knot(g + 1 - i));
        }
        assert!(cfg.extended_knots().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(KnotConfig::new(0.0, 1.0, 3, vec![0.2, 0.4, 0.6]).is_err());
        assert!(KnotConfig::new(0.0, 1.0, 1, vec![0.5, 0.4]).is_err());
        assert!(KnotConfig::new(0.0, 1.0, 1, vec![0.4, 0.4]).is_err());
        assert!(KnotConfig::new(0.0, 1.0, 1, vec![0.0, 0.5]).is_err());
        assert!(KnotConfig::new(1.0, 0.0, 1, vec![0.2, 0.5]).is_err());
        assert!(KnotConfig::new(0.0, 1.0, 0, vec![0.2, 0.5]).is_err());
    }

    #[test]
    fn span_lookup() {
        let cfg = KnotConfig::new(0.0, 1.0, 1, vec![0.25, 0.5, 0.75]).unwrap();
        assert_eq!(cfg.span(0.0).unwrap(), 0);
        assert_eq!(cfg.span(0.25).unwrap(), 1);
        assert_eq!(cfg.span(0.8).unwrap(), 3);
        assert_eq!(cfg.span(1.0).unwrap(), 3);
        assert!(cfg.span(1.0 + 1e-12).is_err());
        assert!(cfg.span(-1e-12).is_err());
    }

    #[test]
    fn json_shape() {
        let cfg = KnotConfig::new(0.0, 1.0, 1, vec![0.25, 0.5, 0.75]).unwrap();
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(s, r#"{"degree":1,"interval":[0.0,1.0],"inner_knots":[0.25,0.5,0.75]}"#);
        let back: KnotConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<KnotConfig>(
            r#"{"degree":1,"interval":[0.0,1.0],"inner_knots":[0.5,0.25]}"#
        )
        .is_err());
    }
}
