//! Bayes-space operations on gridded densities.
//!
//! Integrals are midpoint Riemann sums on a periodic grid: each point owns the
//! cell between the midpoints to its neighbours, with wrap-around at the ends,
//! so the cell widths always add up to `b - a`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for the zero-integral invariant of [`ClrCurve`].
pub const ZERO_INTEGRAL_TOL: f64 = 1e-10;

/// Evaluation abscissae on `[a, b)` with their cell widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    points: Vec<f64>,
    #[serde(skip)]
    widths: Vec<f64>,
}

impl Grid {
    pub fn new(a: f64, b: f64, points: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("grid interval [{a}, {b}) is empty")));
        }
        if points.len() < 2 {
            return Err(Error::InvalidArgument("grid needs at least two points".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
        }
        if points[0] < a || *points.last().unwrap() >= b {
            return Err(Error::InvalidArgument(format!("grid points must lie in [{a}, {b})")));
        }
        let widths = cell_widths(a, b, &points);
        Ok(Self { a, b, points, widths })
    }

    /// `m` points `a + i·h`, `h = (b - a)/m`.
    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        let h = (b - a) / m as f64;
        Self::new(a, b, (0..m).map(|i| a + i as f64 * h).collect())
    }

    /// `m` cell midpoints `a + (i + 1/2)·h`.
    pub fn midpoints(a: f64, b: f64, m: usize) -> Result<Self> {
        let h = (b - a) / m as f64;
        Self::new(a, b, (0..m).map(|i| a + (i as f64 + 0.5) * h).collect())
    }

    /// `m` uniform points on `[0, 2π)` starting at 0.
    pub fn circular(m: usize) -> Result<Self> {
        Self::uniform(0.0, TAU, m)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Length `η = b - a` of the domain.
    pub fn eta(&self) -> f64 {
        self.b - self.a
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.widths.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted mean `(1/η) ∫ v`.
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.integrate(values) / self.eta()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: n });
        }
        Ok(())
    }
}

fn cell_widths(a: f64, b: f64, points: &[f64]) -> Vec<f64> {
    let m = points.len();
    let eta = b - a;
    (0..m)
        .map(|i| {
            let prev = if i == 0 { points[m - 1] - eta } else { points[i - 1] };
            let next = if i + 1 == m { points[0] + eta } else { points[i + 1] };
            0.5 * (next - prev)
        })
        .collect()
}

// `widths` is skipped by serde; rebuild it when a grid is deserialized.
impl Grid {
    pub fn rebuild(self) -> Result<Self> {
        Self::new(self.a, self.b, self.points)
    }
}

/// Positive function values on a grid; a representative of a Bayes-space element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityCurve {
    /// Wraps positive values as they are; see [`DensityCurve::normalized`].
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        grid.check(values.len())?;
        if let Some((index, &value)) =
            values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveDensity { index, value });
        }
        Ok(Self { grid, values })
    }

    /// Uniform density `1/(b - a)`.
    pub fn uniform(grid: Grid) -> Self {
        let v = 1.0 / grid.eta();
        let values = vec![v; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// Rescaled to unit integral.
    pub fn normalized(&self) -> Self {
        let total = self.integral();
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v / total).collect() }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * c).collect())
    }
}

/// Zero-integral function values on a grid, the clr image of a density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClrCurve {
    grid: Grid,
    values: Vec<f64>,
}

impl ClrCurve {
    /// Checks that the values integrate to zero within [`ZERO_INTEGRAL_TOL`].
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        grid.check(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("clr values must be finite".into()));
        }
        let total = grid.integrate(&values);
        let scale: f64 = grid.widths().iter().zip(&values).map(|(w, v)| w * v.abs()).sum();
        if total.abs() > ZERO_INTEGRAL_TOL * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "clr values integrate to {total:.3e}, not zero"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Subtracts the weighted mean so the discrete integral vanishes.
    pub fn centered(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        grid.check(values.len())?;
        let mean = grid.mean(&values);
        for v in &mut values {
            *v -= mean;
        }
        Self::new(grid, values)
    }

    pub fn zero(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn add(&self, other: &ClrCurve) -> Result<ClrCurve> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(p, q)| p + q).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn scale(&self, c: f64) -> ClrCurve {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `L²` inner product by the grid's Riemann sum.
    pub fn dot(&self, other: &ClrCurve) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let prod: Vec<f64> = self.values.iter().zip(&other.values).map(|(p, q)| p * q).collect();
        Ok(self.grid.integrate(&prod))
    }
}

fn same_grid(p: &Grid, q: &Grid) -> Result<()> {
    if p == q {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `clr(f)(x) = ln f(x) - (1/η) ∫ ln f`.
pub fn clr_transform(f: &DensityCurve) -> ClrCurve {
    let logs: Vec<f64> = f.values.iter().map(|v| v.ln()).collect();
    ClrCurve::centered(f.grid.clone(), logs).expect("log of a positive curve is finite")
}

/// `exp(z) / ∫ exp(z)`, shifted by `max z` before exponentiating.
pub fn clr_inverse(z: &ClrCurve) -> DensityCurve {
    let max = z.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = z.values.iter().map(|v| (v - max).exp()).collect();
    let total = z.grid.integrate(&values);
    DensityCurve { grid: z.grid.clone(), values: values.into_iter().map(|v| v / total).collect() }
}

/// Perturbation `f ⊕ g`, normalized.
pub fn perturb(f: &DensityCurve, g: &DensityCurve) -> Result<DensityCurve> {
    same_grid(&f.grid, &g.grid)?;
    let values = f.values.iter().zip(&g.values).map(|(p, q)| p * q).collect();
    Ok(DensityCurve::new(f.grid.clone(), values)?.normalized())
}

/// Powering `α ⊙ f`, normalized.
pub fn power(alpha: f64, f: &DensityCurve) -> DensityCurve {
    let logs: Vec<f64> = f.values.iter().map(|v| alpha * v.ln()).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = logs.iter().map(|v| (v - max).exp()).collect();
    let total = f.grid.integrate(&values);
    DensityCurve { grid: f.grid.clone(), values: values.into_iter().map(|v| v / total).collect() }
}

/// `⟨f, g⟩_ℬ = ⟨clr f, clr g⟩_{L²}`.
pub fn bayes_inner(f: &DensityCurve, g: &DensityCurve) -> Result<f64> {
    same_grid(&f.grid, &g.grid)?;
    clr_transform(f).dot(&clr_transform(g))
}

pub fn bayes_norm(f: &DensityCurve) -> f64 {
    let z = clr_transform(f);
    z.dot(&z).expect("same grid").max(0.0).sqrt()
}

/// `‖f ⊖ g‖_ℬ`.
pub fn bayes_dist(f: &DensityCurve, g: &DensityCurve) -> Result<f64> {
    let diff = clr_transform(f).add(&clr_transform(g).scale(-1.0))?;
    Ok(diff.dot(&diff)?.max(0.0).sqrt())
}

fn common_grid(zs: &[ClrCurve]) -> Result<&Grid> {
    let first = zs.first().ok_or(Error::Empty("curve sample"))?;
    for z in &zs[1..] {
        same_grid(&first.grid, &z.grid)?;
    }
    Ok(&first.grid)
}

/// Pointwise mean of clr curves.
pub fn sample_mean_clr(zs: &[ClrCurve]) -> Result<ClrCurve> {
    let grid = common_grid(zs)?;
    let n = zs.len() as f64;
    let values = (0..grid.len())
        .map(|i| zs.iter().map(|z| z.values[i]).sum::<f64>() / n)
        .collect();
    ClrCurve::new(grid.clone(), values)
}

/// `(1/n) Σ (z_i - z̄)²`, pointwise.
pub fn functional_variance(zs: &[ClrCurve]) -> Result<Vec<f64>> {
    let mean = sample_mean_clr(zs)?;
    let n = zs.len() as f64;
    Ok((0..mean.grid.len())
        .map(|i| zs.iter().map(|z| (z.values[i] - mean.values[i]).powi(2)).sum::<f64>() / n)
        .collect())
}

pub fn functional_sd(zs: &[ClrCurve]) -> Result<Vec<f64>> {
    Ok(functional_variance(zs)?.into_iter().map(f64::sqrt).collect())
}

/// Mean density `clr⁻¹(z̄)`.
pub fn mean_density(fs: &[DensityCurve]) -> Result<DensityCurve> {
    let zs: Vec<ClrCurve> = fs.iter().map(clr_transform).collect();
    Ok(clr_inverse(&sample_mean_clr(&zs)?))
}
