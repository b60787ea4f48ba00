//! Synthetic hourly wind records drawn from von Mises mixtures.
//!
//! Each month has its own mean speed level. Within a month, the weight of a
//! west-southwest component grows with the hourly speed, and an optional
//! planted trend shifts that weight linearly over the months. Month `i` draws
//! from stream `i` of the seeded generator.

use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate};
use circspline::circstats::von_mises_draws;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub months: usize,
    pub start_year: i32,
    pub start_month: u32,
    /// Hours sampled per day.
    pub hours_per_day: u32,
    pub calm_probability: f64,
    /// Change of the south-west weight from first to last month.
    pub trend: f64,
    /// Change of the south-west weight per km/h above 10 km/h.
    pub speed_effect: f64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            months: 120,
            start_year: 2014,
            start_month: 1,
            hours_per_day: 24,
            calm_probability: 0.03,
            trend: 0.0,
            speed_effect: 0.02,
        }
    }
}

const SW_MEAN_DEG: f64 = 240.0;
const SW_KAPPA: f64 = 2.0;
const NE_MEAN_DEG: f64 = 60.0;
const NE_KAPPA: f64 = 1.5;
const UNIFORM_WEIGHT: f64 = 0.1;

fn month_start(spec: &SimulationSpec, i: usize) -> Result<NaiveDate> {
    let idx = (spec.start_month as i64 - 1) + i as i64;
    let year = spec.start_year as i64 + idx.div_euclid(12);
    let month = idx.rem_euclid(12) as u32 + 1;
    NaiveDate::from_ymd_opt(year as i32, month, 1)
        .ok_or_else(|| CliError::Config(format!("invalid simulation start {year}-{month}")))
}

fn days_in_month(d: NaiveDate) -> i64 {
    let next = if d.month() == 12 {
        NaiveDate::from_ymd_opt(d.year() + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(d.year(), d.month() + 1, 1)
    };
    (next.expect("valid month") - d).num_days()
}

/// One month of CSV lines (without header).
fn simulate_month(spec: &SimulationSpec, seed: u64, i: usize) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let start = month_start(spec, i)?;
    let phase = std::f64::consts::TAU * i as f64 / 12.0;
    let level = 10.0 + 3.0 * phase.cos() + 2.0 * (rng.random::<f64>() - 0.5);
    let progress = if spec.months > 1 { i as f64 / (spec.months - 1) as f64 } else { 0.0 };
    let hours = days_in_month(start) * spec.hours_per_day as i64;
    let step = Duration::minutes(24 * 60 / spec.hours_per_day as i64);
    let mut t = start.and_hms_opt(0, 0, 0).expect("midnight");
    let mut out = String::new();
    let map_err = |e: circspline::Error| CliError::core("simulation", e);
    for _ in 0..hours {
        let stamp = t.format("%Y-%m-%dT%H:%M:%S");
        t += step;
        if rng.random::<f64>() < spec.calm_probability {
            out.push_str(&format!("{stamp},,0.0\n"));
            continue;
        }
        // Gamma(2) speeds with mean `level`
        let speed = -0.5 * level * (rng.random::<f64>() * rng.random::<f64>()).max(1e-300).ln();
        let w_sw = (0.45 + spec.speed_effect * (speed - 10.0) + spec.trend * (progress - 0.5)).clamp(0.05, 0.85);
        let u = rng.random::<f64>();
        let theta = if u < UNIFORM_WEIGHT {
            rng.random::<f64>() * std::f64::consts::TAU
        } else if u < UNIFORM_WEIGHT + w_sw * (1.0 - UNIFORM_WEIGHT) {
            von_mises_draws(&mut rng, SW_MEAN_DEG.to_radians(), SW_KAPPA, 1).map_err(map_err)?[0]
        } else {
            von_mises_draws(&mut rng, NE_MEAN_DEG.to_radians(), NE_KAPPA, 1).map_err(map_err)?[0]
        };
        let mut deg = (theta.to_degrees().rem_euclid(360.0) * 10.0).round() / 10.0;
        if deg >= 360.0 {
            deg = 0.0;
        }
        out.push_str(&format!("{stamp},{deg:.1},{:.1}\n", speed.max(0.1)));
    }
    Ok(out)
}

/// Writes the full CSV with header `timestamp,wind_dir_deg,wind_speed_kmh`.
pub fn write_csv<W: Write>(spec: &SimulationSpec, seed: u64, mut w: W) -> Result<()> {
    if spec.months == 0 || spec.hours_per_day == 0 || 24 * 60 % spec.hours_per_day != 0 {
        return Err(CliError::Config("simulation needs months > 0 and hours_per_day dividing 1440".into()));
    }
    let chunks = (0..spec.months)
        .into_par_iter()
        .map(|i| simulate_month(spec, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let io = |e| CliError::Input(format!("writing simulated data: {e}"));
    w.write_all(b"timestamp,wind_dir_deg,wind_speed_kmh\n").map_err(io)?;
    for c in chunks {
        w.write_all(c.as_bytes()).map_err(io)?;
    }
    Ok(())
}
