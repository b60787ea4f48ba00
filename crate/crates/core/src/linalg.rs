//! Small dense linear-algebra helpers shared by the fitting modules.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative threshold for accepting a Cholesky factorization as positive definite.
pub(crate) const PD_TOL: f64 = 1e-12;

/// Factorization of a symmetric positive definite system.
///
/// Cholesky is tried first. A full-pivot LU is the fallback when the Cholesky
/// pivots fall below `PD_TOL` of the diagonal scale; the fallback is rejected
/// when the estimated reciprocal condition number is below machine precision.
pub(crate) enum SpdFactor {
    Cholesky(nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::linalg::FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SpdFactor {
    pub(crate) fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || n != m.ncols() {
            return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
        }
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::Singular("zero or non-finite diagonal".into()));
        }
        if let Some(ch) = m.clone().cholesky() {
            let l = ch.l_dirty();
            let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
            if min_pivot > PD_TOL * scale {
                return Ok(SpdFactor::Cholesky(ch));
            }
        }
        let lu = m.clone().full_piv_lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let rcond = if max > 0.0 { min / max } else { 0.0 };
        if !(rcond > f64::EPSILON) {
            return Err(Error::Singular(format!(
                "matrix is not positive definite (pivot-based reciprocal condition {rcond:.3e})"
            )));
        }
        Ok(SpdFactor::Lu(lu))
    }

    pub(crate) fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            SpdFactor::Cholesky(ch) => ch.solve(b),
            SpdFactor::Lu(lu) => lu.solve(b).expect("LU checked invertible"),
        }
    }

    pub(crate) fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            SpdFactor::Cholesky(ch) => ch.solve(b),
            SpdFactor::Lu(lu) => lu.solve(b).expect("LU checked invertible"),
        }
    }
}

/// Numerical rank from singular values, relative tolerance `tol`.
pub(crate) fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * max.max(f64::MIN_POSITIVE)).count()
}

/// Average `(m + m^T) / 2` so that symmetric formulas stay bitwise symmetric.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
