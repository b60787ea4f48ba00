use nalgebra::DMatrix;

use super::basis::{collocation_matrix, nonzero_basis};
use super::KnotConfig;
use crate::quadrature::GaussRule;
use crate::{Error, Result};

/// Periodicity matrix `K`, `(g+k+1) × (g+1)`.
///
/// Block rows `[I_k | 0]`, `[0 | I_{g-k+1}]`, `[I_k | 0]`: the first `k`
/// periodic coefficients are repeated in the last `k` full slots.
pub fn matrix_k(g: usize, k: usize) -> Result<DMatrix<f64>> {
    if g <= k {
        return Err(Error::InvalidArgument(format!("matrix K needs g > k (g={g}, k={k})")));
    }
    let mut m = DMatrix::zeros(g + k + 1, g + 1);
    for r in 0..=g {
        m[(r, r)] = 1.0;
    }
    for t in 0..k {
        m[(g + 1 + t, t)] = 1.0;
    }
    Ok(m)
}

/// Zero-integral matrix `P`, `(g+1) × g`: identity on top, and a last row
/// `a_j = -(λ_{j+1} - λ_{j-k}) / (λ_{g+1} - λ_{g-k})` that solves the
/// integral condition for the last periodic coefficient.
pub fn matrix_p(cfg: &KnotConfig) -> DMatrix<f64> {
    let g = cfg.g();
    let k = cfg.degree() as isize;
    let denom = cfg.knot(g as isize + 1) - cfg.knot(g as isize - k);
    assert!(denom > 0.0, "degenerate knot spacing in P");
    let mut p = DMatrix::zeros(g + 1, g);
    for c in 0..g {
        p[(c, c)] = 1.0;
        // reduced index c is coefficient b_{c-k}
        let i = c as isize - k;
        p[(g, c)] = -(cfg.knot(i + k + 1) - cfg.knot(i)) / denom;
    }
    p
}

/// `U = K·P`, mapping reduced coefficients `b̄` to full coefficients `b`.
pub fn matrix_u(cfg: &KnotConfig) -> DMatrix<f64> {
    matrix_k(cfg.g(), cfg.degree()).expect("validated knot config") * matrix_p(cfg)
}

/// Derivative operator `S_l = D_l L_l ⋯ D_1 L_1`, `(g+k+1-l) × (g+k+1)`.
///
/// `S_l b` are the degree-`(k-l)` B-spline coefficients of the `l`-th
/// derivative of the degree-`k` spline with coefficients `b`.
pub fn derivative_operator(cfg: &KnotConfig, l: usize) -> Result<DMatrix<f64>> {
    let k = cfg.degree();
    if l == 0 || l >= k {
        return Err(Error::InvalidArgument(format!(
            "derivative order {l} outside 1..={}",
            k.saturating_sub(1)
        )));
    }
    Ok(raw_derivative_operator(cfg, l))
}

pub(crate) fn raw_derivative_operator(cfg: &KnotConfig, l: usize) -> DMatrix<f64> {
    let k = cfg.degree();
    let n = cfg.n_full();
    let mut s = DMatrix::identity(n, n);
    for j in 1..=l {
        let rows = n - j;
        let mut step = DMatrix::zeros(rows, rows + 1);
        for r in 0..rows {
            let i = r as isize - k as isize + j as isize;
            let span = cfg.knot(i + (k + 1 - j) as isize) - cfg.knot(i);
            let d = (k + 1 - j) as f64 / span;
            step[(r, r)] = -d;
            step[(r, r + 1)] = d;
        }
        s = step * s;
    }
    s
}

/// Gram matrix `M_kl` of the degree-`(k-l)` B-splines over `[a, b]`.
///
/// Integrated interval by interval with `k - l + 1` Gauss-Legendre nodes,
/// which is exact for the piecewise polynomial products.
pub fn gram_matrix(cfg: &KnotConfig, l: usize) -> Result<DMatrix<f64>> {
    let k = cfg.degree();
    if l > k {
        return Err(Error::InvalidArgument(format!("gram order l={l} exceeds k={k}")));
    }
    let order = k + 1 - l;
    let n = cfg.g() + order;
    let rule = GaussRule::new(order);
    let mut m = DMatrix::zeros(n, n);
    for span in 0..=cfg.g() {
        let (lo, hi) = (cfg.knot(span as isize), cfg.knot(span as isize + 1));
        for (x, w) in rule.on(lo, hi) {
            let vals = nonzero_basis(cfg, order, span, x);
            for (p, vp) in vals.iter().enumerate() {
                for (q, vq) in vals.iter().enumerate().skip(p) {
                    m[(span + p, span + q)] += w * vp * vq;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    Ok(m)
}

/// Ordinary `d`-th order forward-difference matrix, `(g-d) × g`.
pub fn difference_matrix(g: usize, d: usize) -> Result<DMatrix<f64>> {
    if d == 0 || d >= g {
        return Err(Error::InvalidArgument(format!("difference order {d} outside 1..{g}")));
    }
    let mut m = DMatrix::identity(g, g);
    for step in 0..d {
        let cols = g - step;
        let mut d1 = DMatrix::zeros(cols - 1, cols);
        for r in 0..cols - 1 {
            d1[(r, r)] = -1.0;
            d1[(r, r + 1)] = 1.0;
        }
        m = d1 * m;
    }
    Ok(m)
}

/// Circulant `d`-th order difference matrix on `n` cyclically ordered values.
pub fn cyclic_difference_matrix(n: usize, d: usize) -> Result<DMatrix<f64>> {
    if d == 0 || d >= n {
        return Err(Error::InvalidArgument(format!("cyclic difference order {d} outside 1..{n}")));
    }
    let mut d1 = DMatrix::zeros(n, n);
    for r in 0..n {
        d1[(r, r)] = -1.0;
        d1[(r, (r + 1) % n)] = 1.0;
    }
    let mut m = d1.clone();
    for _ in 1..d {
        m = &d1 * m;
    }
    Ok(m)
}

/// Difference penalty acting on the reduced coefficients `b̄`.
///
/// Acyclic: `D_d` on `b̄` directly. Cyclic: circulant differences of the
/// `g + 1` periodic coefficients `P·b̄`, which wrap around the circle.
pub fn penalty_difference(cfg: &KnotConfig, d: usize, cyclic: bool) -> Result<DMatrix<f64>> {
    if cyclic {
        Ok(cyclic_difference_matrix(cfg.n_periodic(), d)? * matrix_p(cfg))
    } else {
        difference_matrix(cfg.g(), d)
    }
}

/// Matrices of one fitting problem: collocation `C`, `K`, `P`, `U = K·P`,
/// and optionally `S_l`, `M_kl` and a difference penalty.
#[derive(Debug, Clone)]
pub struct DesignMatrices {
    pub collocation: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub derivative: Option<DMatrix<f64>>,
    pub gram: Option<DMatrix<f64>>,
    pub difference: Option<DMatrix<f64>>,
}

impl DesignMatrices {
    pub fn new(cfg: &KnotConfig, xs: &[f64]) -> Result<Self> {
        let collocation = collocation_matrix(cfg, xs)?;
        let k = matrix_k(cfg.g(), cfg.degree())?;
        let p = matrix_p(cfg);
        let u = &k * &p;
        Ok(Self { collocation, k, p, u, derivative: None, gram: None, difference: None })
    }

    pub fn with_derivative(mut self, cfg: &KnotConfig, l: usize) -> Result<Self> {
        self.derivative = Some(derivative_operator(cfg, l)?);
        self.gram = Some(gram_matrix(cfg, l)?);
        Ok(self)
    }

    pub fn with_difference(mut self, cfg: &KnotConfig, d: usize, cyclic: bool) -> Result<Self> {
        self.difference = Some(penalty_difference(cfg, d, cyclic)?);
        Ok(self)
    }
}
