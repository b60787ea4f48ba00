use nalgebra::{DMatrix, DVector};

use super::KnotConfig;
use crate::{Error, Result};

/// Values of the `order` B-splines of that order that are nonzero on knot
/// interval `span`, at `x` (de Boor's triangular scheme).
///
/// Entry `s` belongs to `B_{span-order+1+s}`, which sits in column `span + s`
/// of an order-`order` basis vector. Orders up to `k + 2` are supported by the
/// stored knot extension.
pub(crate) fn nonzero_basis(cfg: &KnotConfig, order: usize, span: usize, x: f64) -> Vec<f64> {
    debug_assert!(order >= 1 && order <= cfg.degree() + 2);
    let j = span as isize;
    let mut n = vec![0.0; order];
    let mut left = vec![0.0; order];
    let mut right = vec![0.0; order];
    n[0] = 1.0;
    for r in 1..order {
        left[r] = x - cfg.knot(j + 1 - r as isize);
        right[r] = cfg.knot(j + r as isize) - x;
        let mut saved = 0.0;
        for s in 0..r {
            let denom = right[s + 1] + left[r - s];
            // 0/0 := 0 at coincident knots
            let temp = if denom == 0.0 { 0.0 } else { n[s] / denom };
            n[s] = saved + right[s + 1] * temp;
            saved = left[r - s] * temp;
        }
        n[r] = saved;
    }
    n
}

/// All `g + order` B-splines of the given order at `x`, indices `-(order-1)..=g`.
pub fn basis_of_order(cfg: &KnotConfig, order: usize, x: f64) -> Result<DVector<f64>> {
    if order == 0 || order > cfg.degree() + 1 {
        return Err(Error::InvalidArgument(format!(
            "basis order {order} outside 1..={}",
            cfg.degree() + 1
        )));
    }
    let span = cfg.span(x)?;
    let mut out = DVector::zeros(cfg.g() + order);
    for (s, v) in nonzero_basis(cfg, order, span, x).into_iter().enumerate() {
        out[span + s] = v;
    }
    Ok(out)
}

/// `B_{-k}^{k+1}(x), …, B_g^{k+1}(x)`.
pub fn bspline_basis(cfg: &KnotConfig, x: f64) -> Result<DVector<f64>> {
    basis_of_order(cfg, cfg.degree() + 1, x)
}

/// `n × (g+k+1)` matrix of basis values, one row per abscissa.
pub fn collocation_matrix(cfg: &KnotConfig, xs: &[f64]) -> Result<DMatrix<f64>> {
    if xs.is_empty() {
        return Err(Error::Empty("collocation abscissae"));
    }
    let order = cfg.degree() + 1;
    let mut c = DMatrix::zeros(xs.len(), cfg.n_full());
    for (row, &x) in xs.iter().enumerate() {
        let span = cfg.span(x)?;
        for (s, v) in nonzero_basis(cfg, order, span, x).into_iter().enumerate() {
            c[(row, span + s)] = v;
        }
    }
    Ok(c)
}

/// `∫_a^b B_i^{order}(x) dx` for every basis function of the given order.
///
/// Closed form through the antiderivative identity
/// `∫_{-∞}^x B_i^m = (λ_{i+m} - λ_i)/m · Σ_{j≥i} B_j^{m+1}(x)`, evaluated at
/// both ends of the interval. Functions whose support lies inside `[a, b]`
/// get exactly `(λ_{i+m} - λ_i)/m`.
pub fn basis_integrals(cfg: &KnotConfig, order: usize) -> Vec<f64> {
    assert!(order >= 1 && order <= cfg.degree() + 1);
    let g = cfg.g() as isize;
    let m = order as isize;
    // order m+1 values at a (span 0): indices -m..=0
    let at_a = nonzero_basis(cfg, order + 1, 0, cfg.a());
    // order m+1 values at b (span g): indices g-m..=g
    let at_b = nonzero_basis(cfg, order + 1, cfg.g(), cfg.b());

    let tail_sum = |vals: &[f64], first: isize, i: isize| -> f64 {
        // Σ_{j ≥ i} over the listed indices first..first+len
        vals.iter()
            .enumerate()
            .filter(|(s, _)| first + *s as isize >= i)
            .map(|(_, v)| *v)
            .sum()
    };

    (-(m - 1)..=g)
        .map(|i| {
            let w = (cfg.knot(i + m) - cfg.knot(i)) / order as f64;
            let upper = if i < g - m { 1.0 } else { tail_sum(&at_b, g - m, i) };
            let lower = if i > 0 { 0.0 } else { tail_sum(&at_a, -m, i) };
            w * (upper - lower)
        })
        .collect()
}

/// Schoenberg-Whitney check for the full degree-`k` basis: whether there are
/// strictly increasing `u_{-k} < … < u_g` among `xs` with `λ_i < u_i < λ_{i+k+1}`.
///
/// Greedy assignment of the smallest admissible abscissa is optimal here.
pub fn schoenberg_whitney(cfg: &KnotConfig, xs: &[f64]) -> bool {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(|p, q| p.total_cmp(q));
    sorted.dedup();
    let k = cfg.degree() as isize;
    let g = cfg.g() as isize;
    let mut next = 0usize;
    for i in -k..=g {
        let lo = cfg.knot(i);
        let hi = cfg.knot(i + k + 1);
        while next < sorted.len() && sorted[next] <= lo {
            next += 1;
        }
        if next >= sorted.len() || sorted[next] >= hi {
            return false;
        }
        next += 1;
    }
    true
}
