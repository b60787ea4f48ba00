//! Periodic zero-integral smoothing splines for circular densities.
//!
//! Densities on a circle are handled in the Bayes space: they are mapped by
//! the centered log-ratio (clr) transform to zero-integral functions, smoothed
//! there with periodic splines whose coefficients are constrained to have zero
//! integral, and mapped back with the inverse clr.
//!
//! Modules:
//! - [`splinecore`]: periodic B-spline bases, constraint matrices and spline evaluation.
//! - [`bayes`]: clr / inverse clr, perturbation, powering and functional statistics.
//! - [`circstats`]: trigonometric moments, von Mises density, kernel estimates.
//! - [`smoothfit`]: smoothing splines and P-splines with GCV parameter selection.
//! - [`fosreg`]: function-on-scalar regression with bootstrap bands.

// NaN must fail validation, so checks are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod circstats;
mod error;
pub mod fosreg;
mod linalg;
pub mod quadrature;
pub mod smoothfit;
pub mod splinecore;

pub use bayes::{ClrCurve, DensityCurve, Grid};
pub use circstats::{CircularSample, TrigMoment};
pub use error::{Error, Result};
pub use fosreg::{BandKind, BootstrapBands, RegressionDataset, RegressionModel};
pub use smoothfit::{FitProblem, FitResult, PSplineConfig, Penalty, SmoothingConfig};
pub use splinecore::{KnotConfig, PeriodicSplineZ};

/// Re-exported so downstream crates share one matrix type.
pub use nalgebra::{DMatrix, DVector};
