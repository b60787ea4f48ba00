//! Periodic B-spline bases and splines with zero integral.
//!
//! A degree-`k` spline on `[a, b]` with `g` inner knots has `g + k + 1`
//! B-spline coefficients. Periodic boundary knots turn the periodicity
//! conditions into `b_{-i} = b_{g+1-i}` (matrix `K`), leaving `g + 1`
//! free coefficients; the zero-integral condition eliminates one more
//! (matrix `P`), leaving the `g` reduced coefficients `b̄`. Everything is
//! indexed so that full coefficient `i ∈ -k..=g` lives at position `i + k`.

mod basis;
mod knots;
mod matrices;
mod spline;

pub use basis::{
    basis_integrals, basis_of_order, bspline_basis, collocation_matrix, schoenberg_whitney,
};
pub use knots::{extend_knots_periodic, KnotConfig};
pub use matrices::{
    cyclic_difference_matrix, derivative_operator, difference_matrix, gram_matrix, matrix_k,
    matrix_p, matrix_u, penalty_difference, DesignMatrices,
};
pub use spline::{eval_derivative, eval_full, eval_spline, spline_integral, PeriodicSplineZ};
