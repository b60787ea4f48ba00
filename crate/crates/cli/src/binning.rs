//! Monthly direction histograms and their discrete clr transform.

use std::f64::consts::TAU;

use circspline::bayes::{clr_transform, DensityCurve, Grid};
use serde::Serialize;

use crate::config::ZeroStrategy;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyHistogram {
    pub label: String,
    /// `m + 1` edges over `[0, 2π]`, starting at north.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Relative frequencies after zero handling; they sum to 1.
    pub rel_freq: Vec<f64>,
    /// Discrete clr of `rel_freq` at the bin midpoints.
    pub clr_values: Vec<f64>,
    pub zero_bins: usize,
    pub zero_strategy: ZeroStrategy,
    pub pseudo_count: f64,
}

impl MonthlyHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Grid of bin midpoints with equal cell widths.
    pub fn grid(&self) -> Grid {
        Grid::midpoints(0.0, TAU, self.bins()).expect("at least four bins")
    }
}

/// Bin index of a compass angle in `[0, 2π)`.
pub fn bin_index(theta: f64, m: usize) -> usize {
    let i = (theta.rem_euclid(TAU) / TAU * m as f64).floor() as usize;
    i.min(m - 1)
}

/// Histogram of one month of directions (compass radians).
pub fn bin_month(
    label: &str,
    directions: &[f64],
    m: usize,
    strategy: ZeroStrategy,
    pseudo_count: f64,
) -> Result<MonthlyHistogram> {
    if m < 4 {
        return Err(CliError::Config(format!("{m} bins; at least 4 required")));
    }
    if directions.is_empty() {
        return Err(CliError::Input(format!("month {label} has no usable records")));
    }
    let mut counts = vec![0u64; m];
    for &theta in directions {
        counts[bin_index(theta, m)] += 1;
    }
    let total = directions.len() as f64;
    let zero_bins = counts.iter().filter(|c| **c == 0).count();
    let rel_freq: Vec<f64> = match strategy {
        ZeroStrategy::Additive => {
            let denom = total + m as f64 * pseudo_count;
            counts.iter().map(|c| (*c as f64 + pseudo_count) / denom).collect()
        }
        ZeroStrategy::Multiplicative => {
            let delta = pseudo_count / total;
            let keep = 1.0 - zero_bins as f64 * delta;
            if keep <= 0.0 {
                return Err(CliError::Input(format!(
                    "month {label}: {zero_bins} empty bins leave no mass for multiplicative replacement"
                )));
            }
            counts
                .iter()
                .map(|c| if *c == 0 { delta } else { keep * *c as f64 / total })
                .collect()
        }
        ZeroStrategy::Reject => {
            if zero_bins > 0 {
                return Err(CliError::Input(format!(
                    "month {label}: {zero_bins} empty bins and zero_strategy = reject"
                )));
            }
            counts.iter().map(|c| *c as f64 / total).collect()
        }
    };
    let grid = Grid::midpoints(0.0, TAU, m).map_err(|e| CliError::core("histogram grid", e))?;
    let density = DensityCurve::new(grid, rel_freq.clone())
        .map_err(|e| CliError::core(format!("month {label}"), e))?;
    let clr_values = clr_transform(&density).values().to_vec();
    let h = TAU / m as f64;
    Ok(MonthlyHistogram {
        label: label.to_string(),
        bin_edges: (0..=m).map(|i| if i == m { TAU } else { i as f64 * h }).collect(),
        counts,
        rel_freq,
        clr_values,
        zero_bins,
        zero_strategy: strategy,
        pseudo_count,
    })
}
