//! The analysis pipeline behind the commands: ingest, bin, fit, summarise,
//! regress and predict. Everything here is pure computation; files are
//! written by the callers.

use std::collections::BTreeMap;
use std::fmt::Write;

use circspline::bayes::{clr_inverse, functional_sd, mean_density, sample_mean_clr, ClrCurve, DensityCurve, Grid};
use circspline::circstats::{summarize, CircularSample};
use circspline::fosreg::{self, BootstrapBands, RegressionDataset, RegressionModel};
use circspline::smoothfit::{
    optimize_alpha, optimize_rho, solve_pspline, solve_smoothing, FitProblem, FitResult, PSplineConfig,
    SmoothingConfig,
};
use circspline::{KnotConfig, PeriodicSplineZ};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::binning::{bin_month, MonthlyHistogram};
use crate::config::{Config, ParamChoice, Variant};
use crate::error::{CliError, Result};
use crate::ingest::{group_by_month, ingest_path, IngestReport, WindRecord};

/// Months with fewer observations than bins trigger a warning.
pub fn sparse_month_warning(h: &MonthlyHistogram) -> Option<String> {
    (h.total() < h.bins() as u64).then(|| {
        format!("warning: month {} has {} observations for {} bins", h.label, h.total(), h.bins())
    })
}

#[derive(Debug, Clone)]
pub struct MonthData {
    pub histogram: MonthlyHistogram,
    pub records: Vec<WindRecord>,
}

impl MonthData {
    pub fn label(&self) -> &str {
        &self.histogram.label
    }

    pub fn directions(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.direction).collect()
    }
}

/// Ingested records binned per month, months ascending.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub report: IngestReport,
    pub months: Vec<MonthData>,
    pub warnings: Vec<String>,
}

pub fn prepare(cfg: &Config) -> Result<Prepared> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("no input file: pass --input or set `input` in the config".into()))?;
    let ingested = ingest_path(input, &cfg.columns, cfg.malformed_threshold)?;
    prepare_records(cfg, ingested.records, ingested.report)
}

pub fn prepare_records(cfg: &Config, records: Vec<WindRecord>, report: IngestReport) -> Result<Prepared> {
    let grouped = group_by_month(&records);
    if grouped.is_empty() {
        return Err(CliError::Input("no retained records after excluding calm rows".into()));
    }
    let mut months = Vec::with_capacity(grouped.len());
    let mut warnings = Vec::new();
    for (label, recs) in grouped {
        let dirs: Vec<f64> = recs.iter().map(|r| r.direction).collect();
        let histogram = bin_month(&label, &dirs, cfg.bins, cfg.zero_strategy, cfg.pseudo_count)?;
        warnings.extend(sparse_month_warning(&histogram));
        months.push(MonthData { histogram, records: recs.into_iter().cloned().collect() });
    }
    Ok(Prepared { report, months, warnings })
}

#[derive(Debug, Clone)]
pub struct MonthFit {
    pub month: String,
    pub variant: Variant,
    pub fit: FitResult,
}

impl MonthFit {
    pub fn to_json(&self, h: &MonthlyHistogram) -> Value {
        let mut v = self.fit.to_json();
        let map = v.as_object_mut().expect("fit JSON is an object");
        map.insert("month".into(), json!(self.month));
        map.insert("fit_variant".into(), json!(self.variant.label()));
        map.insert("smoothing_effect".into(), json!(self.fit.penalty.smoothing_effect()));
        map.insert(
            "preprocessing".into(),
            json!({
                "bins": h.bins(),
                "observations": h.total(),
                "zero_bins": h.zero_bins,
                "zero_strategy": h.zero_strategy,
                "pseudo_count": h.pseudo_count,
            }),
        );
        v
    }
}

/// Fits one month's clr histogram with one variant.
pub fn fit_histogram(
    h: &MonthlyHistogram,
    knots: &KnotConfig,
    variant: Variant,
    param: ParamChoice,
    cyclic: bool,
) -> Result<FitResult> {
    let ctx = |e| CliError::core(format!("month {} variant {}", h.label, variant), e);
    let problem = FitProblem::new(h.midpoints(), h.clr_values.clone(), knots.clone()).map_err(ctx)?;
    let l = variant.order();
    let fit = match (variant.is_smoothing(), param) {
        (true, ParamChoice::Auto) => optimize_alpha(&problem, l).map(|(_, f)| f),
        (true, ParamChoice::Fixed(alpha)) => {
            if alpha >= 1.0 {
                return Err(CliError::Config(format!("alpha = {alpha} for variant {variant} must lie in (0, 1)")));
            }
            SmoothingConfig::new(alpha, l).and_then(|c| solve_smoothing(&problem, &c))
        }
        (false, ParamChoice::Auto) => optimize_rho(&problem, l, cyclic).map(|(_, f)| f),
        (false, ParamChoice::Fixed(rho)) => {
            PSplineConfig::new(rho, l).and_then(|c| solve_pspline(&problem, &c.cyclic(cyclic)))
        }
    };
    fit.map_err(ctx)
}

/// All months × selected variants, ordered by month then variant.
pub fn fit_months(cfg: &Config, months: &[MonthData]) -> Result<Vec<MonthFit>> {
    let knots = cfg.knot_config()?;
    let variants = cfg.variants()?.0;
    let params = cfg.params()?;
    let jobs: Vec<(usize, Variant)> =
        (0..months.len()).flat_map(|i| variants.iter().map(move |v| (i, *v))).collect();
    jobs.par_iter()
        .map(|&(i, v)| {
            let h = &months[i].histogram;
            let fit = fit_histogram(h, &knots, v, params.for_variant(v), cfg.cyclic)?;
            Ok(MonthFit { month: h.label.clone(), variant: v, fit })
        })
        .collect()
}

fn csv_num(v: f64) -> String {
    if v.is_finite() { format!("{v}") } else { String::new() }
}

/// `month,variant,param,sse,gcv,hat_trace`.
pub fn summary_csv(fits: &[MonthFit]) -> String {
    let mut s = String::from("month,variant,param,sse,gcv,hat_trace\n");
    for f in fits {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            f.month,
            f.variant,
            csv_num(f.fit.parameter()),
            csv_num(f.fit.sse),
            csv_num(f.fit.gcv),
            csv_num(f.fit.hat_trace)
        )
        .unwrap();
    }
    s
}

/// Per-variant SSE extremes and means over months.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub months: usize,
    pub max_month: String,
    pub max_sse: f64,
    pub min_month: String,
    pub min_sse: f64,
    pub mean_sse: f64,
    pub mean_param: f64,
    pub mean_smoothing_effect: f64,
}

pub fn variant_summaries(fits: &[MonthFit]) -> Vec<VariantSummary> {
    let mut by_variant: BTreeMap<Variant, Vec<&MonthFit>> = BTreeMap::new();
    for f in fits {
        by_variant.entry(f.variant).or_default().push(f);
    }
    by_variant
        .into_iter()
        .map(|(variant, fs)| {
            // ties keep the earliest month
            let max = fs.iter().fold(fs[0], |m, f| if f.fit.sse > m.fit.sse { f } else { m });
            let min = fs.iter().fold(fs[0], |m, f| if f.fit.sse < m.fit.sse { f } else { m });
            let n = fs.len() as f64;
            VariantSummary {
                variant,
                months: fs.len(),
                max_month: max.month.clone(),
                max_sse: max.fit.sse,
                min_month: min.month.clone(),
                min_sse: min.fit.sse,
                mean_sse: fs.iter().map(|f| f.fit.sse).sum::<f64>() / n,
                mean_param: fs.iter().map(|f| f.fit.parameter()).sum::<f64>() / n,
                mean_smoothing_effect: fs.iter().map(|f| f.fit.penalty.smoothing_effect()).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Months with maximum and minimum SSE per variant.
pub fn sse_extrema_csv(summaries: &[VariantSummary]) -> String {
    let mut s = String::from("variant,max_month,max_sse,min_month,min_sse\n");
    for v in summaries {
        writeln!(s, "{},{},{},{},{}", v.variant, v.max_month, v.max_sse, v.min_month, v.min_sse).unwrap();
    }
    s
}

/// Mean SSE, parameter and smoothing effect per variant.
pub fn sse_mean_csv(summaries: &[VariantSummary]) -> String {
    let mut s = String::from("variant,months,mean_sse,mean_param,mean_smoothing_effect\n");
    for v in summaries {
        writeln!(s, "{},{},{},{},{}", v.variant, v.months, v.mean_sse, v.mean_param, v.mean_smoothing_effect).unwrap();
    }
    s
}

/// Plain-text rendering of both comparison tables.
pub fn variant_tables(summaries: &[VariantSummary]) -> String {
    let mut s = String::from("Months with maximum and minimum SSE\n");
    writeln!(s, "{:<8} {:>10} {:>12} {:>10} {:>12}", "variant", "max month", "max SSE", "min month", "min SSE").unwrap();
    for v in summaries {
        writeln!(
            s,
            "({})      {:>10} {:>12.4} {:>10} {:>12.4}",
            v.variant, v.max_month, v.max_sse, v.min_month, v.min_sse
        )
        .unwrap();
    }
    s.push_str("\nMean SSE over all months\n");
    let header: Vec<String> = summaries.iter().map(|v| format!("{:>10}", format!("({})", v.variant))).collect();
    writeln!(s, "{:<14}{}", "variant", header.join("")).unwrap();
    let means: Vec<String> = summaries.iter().map(|v| format!("{:>10.4}", v.mean_sse)).collect();
    writeln!(s, "{:<14}{}", "mean SSE", means.join("")).unwrap();
    let params: Vec<String> = summaries.iter().map(|v| format!("{:>10.4}", v.mean_param)).collect();
    writeln!(s, "{:<14}{}", "mean param", params.join("")).unwrap();
    s
}

pub fn evaluation_grid(cfg: &Config) -> Result<Grid> {
    Grid::circular(cfg.grid_points).map_err(|e| CliError::core("evaluation grid", e))
}

pub fn spline_clr(s: &PeriodicSplineZ, grid: &Grid) -> Result<ClrCurve> {
    let values = s.eval_many(grid.points()).map_err(|e| CliError::core("spline evaluation", e))?;
    ClrCurve::centered(grid.clone(), values).map_err(|e| CliError::core("spline evaluation", e))
}

pub fn spline_density(s: &PeriodicSplineZ, grid: &Grid) -> Result<DensityCurve> {
    Ok(clr_inverse(&spline_clr(s, grid)?))
}

/// Compass degrees to mathematical degrees (counter-clockwise from east).
pub fn compass_to_math_deg(deg: f64) -> f64 {
    (90.0 - deg).rem_euclid(360.0)
}

fn circular_json(label: &str, dirs: &[f64]) -> Result<Value> {
    let s = CircularSample::new(dirs.iter().copied()).map_err(|e| CliError::core(label, e))?;
    let sum = summarize(&s);
    // stored angles are compass, so mean_direction_deg is clockwise from north
    Ok(json!({
        "label": label,
        "n": sum.n,
        "mean_direction_deg": sum.mean_direction_deg,
        "mean_direction_math_deg": sum.mean_direction_deg.map(compass_to_math_deg),
        "mean_resultant_length": sum.mean_resultant_length,
        "circ_variance": sum.circ_variance,
        "circ_sd": sum.circ_sd,
        "mean_angular_deviation": sum.mean_angular_deviation,
    }))
}

/// Functional mean and SD of the fitted clr curves and the mean density.
pub struct FunctionalSummary {
    pub grid: Grid,
    pub mean_clr: ClrCurve,
    pub sd_clr: Vec<f64>,
    pub mean_density: DensityCurve,
}

pub fn functional_summary(fits: &[&MonthFit], grid: &Grid) -> Result<FunctionalSummary> {
    let zs = fits.iter().map(|f| spline_clr(&f.fit.spline, grid)).collect::<Result<Vec<_>>>()?;
    let ctx = |e| CliError::core("functional statistics", e);
    let densities: Vec<DensityCurve> = zs.iter().map(clr_inverse).collect();
    Ok(FunctionalSummary {
        grid: grid.clone(),
        mean_clr: sample_mean_clr(&zs).map_err(ctx)?,
        sd_clr: functional_sd(&zs).map_err(ctx)?,
        mean_density: mean_density(&densities).map_err(ctx)?,
    })
}

/// Circular statistics per month and overall, plus functional summaries of
/// the fits of one variant.
pub fn stats_report(prepared: &Prepared, fits: &[MonthFit], variant: Variant, grid: &Grid) -> Result<Value> {
    let months = prepared
        .months
        .iter()
        .map(|m| circular_json(m.label(), &m.directions()))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<f64> = prepared.months.iter().flat_map(|m| m.directions()).collect();
    let chosen: Vec<&MonthFit> = fits.iter().filter(|f| f.variant == variant).collect();
    let fs = functional_summary(&chosen, grid)?;
    let deg: Vec<f64> = grid.points().iter().map(|t| t.to_degrees()).collect();
    Ok(json!({
        "months": months,
        "overall": circular_json("all", &all)?,
        "functional": {
            "variant": variant.label(),
            "months": chosen.len(),
            "grid_compass_deg": deg,
            "grid_math_deg": deg.iter().map(|d| compass_to_math_deg(*d)).collect::<Vec<_>>(),
            "mean_clr": fs.mean_clr.values(),
            "sd_clr": fs.sd_clr,
            "mean_density": fs.mean_density.values(),
            "mean_density_integral": fs.mean_density.integral(),
        },
        "ingest": prepared.report,
    }))
}

/// Covariate per month: `time` gives `1..n`, otherwise the monthly mean of
/// the named numeric column.
pub fn covariates(cfg: &Config, prepared: &Prepared, spec: &str) -> Result<Vec<f64>> {
    if spec == "time" {
        return Ok((1..=prepared.months.len()).map(|i| i as f64).collect());
    }
    prepared
        .months
        .iter()
        .map(|m| {
            let vals: Vec<f64> = m.records.iter().filter_map(|r| r.numeric(spec, &cfg.columns)).collect();
            if vals.is_empty() {
                Err(CliError::Input(format!("covariate {spec:?} unavailable for month {}", m.label())))
            } else {
                Ok(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        })
        .collect()
}

pub struct Regression {
    pub variant: Variant,
    pub covariate: String,
    pub values: Vec<f64>,
    pub dataset: RegressionDataset,
    pub model: RegressionModel,
}

/// Variant used for regression, prediction and single-variant summaries.
pub fn primary_variant(cfg: &Config) -> Result<Variant> {
    Ok(cfg.variants()?.0[0])
}

pub fn regression(cfg: &Config, prepared: &Prepared, fits: &[MonthFit], covariate: &str) -> Result<Regression> {
    let variant = primary_variant(cfg)?;
    let values = covariates(cfg, prepared, covariate)?;
    let splines: Vec<PeriodicSplineZ> =
        fits.iter().filter(|f| f.variant == variant).map(|f| f.fit.spline.clone()).collect();
    let cov: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
    let ctx = |e| CliError::core(format!("regression on {covariate:?}"), e);
    let dataset = RegressionDataset::from_splines(&splines, &cov).map_err(ctx)?;
    let model = fosreg::fit_fos(&dataset).map_err(ctx)?;
    Ok(Regression { variant, covariate: covariate.to_string(), values, dataset, model })
}

pub fn bootstrap(cfg: &Config, reg: &Regression, grid: &Grid) -> Result<BootstrapBands> {
    fosreg::bootstrap_bands_with(&reg.model, &reg.dataset, cfg.bootstrap, cfg.level, cfg.seed, grid, cfg.band)
        .map_err(|e| CliError::core("bootstrap", e))
}

pub fn regression_report(reg: &Regression, bands: &BootstrapBands) -> Result<Value> {
    let mut v = fosreg::report_json(&reg.model, bands).map_err(|e| CliError::core("regression report", e))?;
    let map = v.as_object_mut().expect("report is an object");
    map.insert("variant".into(), json!(reg.variant.label()));
    map.insert("covariate".into(), json!(reg.covariate));
    map.insert("covariate_values".into(), json!(reg.values));
    map.insert("band_kind".into(), json!(bands.kind));
    map.insert("grid_units".into(), json!("compass radians"));
    Ok(v)
}

/// Predicted densities for covariate values.
pub fn predictions(reg: &Regression, at: &[f64], grid: &Grid) -> Result<Vec<DensityCurve>> {
    at.iter()
        .map(|x| fosreg::predict_density(&reg.model, &[*x], grid).map_err(|e| CliError::core("prediction", e)))
        .collect()
}
