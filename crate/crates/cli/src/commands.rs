//! Command implementations. Each command computes everything first and then
//! hands back the complete set of files, which the caller writes in one pass.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};

use crate::config::{Config, Variant};
use crate::error::{CliError, Result};
use crate::pipeline::{self, MonthData, MonthFit, Prepared};
use crate::simulate::{write_csv, SimulationSpec};
use crate::svg::{self, Series};

/// Files of one run, relative to the output directory, plus console lines.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(PathBuf, String)>,
    pub messages: Vec<String>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<PathBuf>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn json(&mut self, name: impl Into<PathBuf>, v: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)
            .map_err(|e| CliError::Numerical(format!("serializing output: {e}")))?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    /// Writes every file, creating directories as needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, contents) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs a command body and appends the effective configuration.
fn finish(cfg: &Config, mut out: Outputs) -> Result<Outputs> {
    out.add(crate::config::EFFECTIVE_CONFIG, cfg.to_toml()?);
    Ok(out)
}

fn with_warnings(prepared: &Prepared, out: &mut Outputs) {
    out.messages.extend(prepared.warnings.iter().cloned());
}

pub fn ingest(cfg: &Config) -> Result<Outputs> {
    let prepared = pipeline::prepare(cfg)?;
    let mut out = Outputs::default();
    with_warnings(&prepared, &mut out);
    let r = &prepared.report;
    out.messages.push(format!(
        "{} rows: {} retained, {} calm, {} undefined direction, {} malformed; {} months",
        r.total,
        r.retained,
        r.calm,
        r.undefined_direction,
        r.malformed,
        prepared.months.len()
    ));
    out.json(
        "ingest_report.json",
        &json!({
            "report": r,
            "excluded": r.excluded(),
            "months": prepared.months.iter().map(|m| json!({
                "month": m.label(),
                "observations": m.histogram.total(),
            })).collect::<Vec<_>>(),
        }),
    )?;
    let hist: Vec<&crate::binning::MonthlyHistogram> = prepared.months.iter().map(|m| &m.histogram).collect();
    out.json("histograms.json", &json!(hist))?;
    finish(cfg, out)
}

fn fit_prepared(cfg: &Config) -> Result<(Prepared, Vec<MonthFit>)> {
    let prepared = pipeline::prepare(cfg)?;
    let fits = pipeline::fit_months(cfg, &prepared.months)?;
    Ok((prepared, fits))
}

fn histogram_of<'a>(months: &'a [MonthData], label: &str) -> &'a crate::binning::MonthlyHistogram {
    &months.iter().find(|m| m.label() == label).expect("fit month comes from the data").histogram
}

pub fn fit(cfg: &Config) -> Result<Outputs> {
    let (prepared, fits) = fit_prepared(cfg)?;
    let mut out = Outputs::default();
    with_warnings(&prepared, &mut out);
    for f in &fits {
        let h = histogram_of(&prepared.months, &f.month);
        out.json(format!("fits/{}_{}.json", f.month, f.variant), &f.to_json(h))?;
    }
    let summaries = pipeline::variant_summaries(&fits);
    out.add("summary.csv", pipeline::summary_csv(&fits));
    out.add("sse_extrema.csv", pipeline::sse_extrema_csv(&summaries));
    out.add("sse_mean.csv", pipeline::sse_mean_csv(&summaries));
    let tables = pipeline::variant_tables(&summaries);
    out.messages.push(tables.trim_end().to_string());
    out.add("variant_tables.txt", tables);
    finish(cfg, out)
}

pub fn stats(cfg: &Config) -> Result<Outputs> {
    let variant = pipeline::primary_variant(cfg)?;
    let single = Config { variant: variant.label().into(), ..cfg.clone() };
    let (prepared, fits) = fit_prepared(&single)?;
    let grid = pipeline::evaluation_grid(cfg)?;
    let report = pipeline::stats_report(&prepared, &fits, variant, &grid)?;
    let mut out = Outputs::default();
    with_warnings(&prepared, &mut out);
    let overall = &report["overall"];
    out.messages.push(format!(
        "{} months; overall mean direction {} deg (compass), R = {:.4}",
        prepared.months.len(),
        overall["mean_direction_deg"].as_f64().map_or("undefined".into(), |d| format!("{d:.1}")),
        overall["mean_resultant_length"].as_f64().unwrap_or(f64::NAN)
    ));
    out.json("stats.json", &report)?;
    finish(cfg, out)
}

/// Degrees with the first point repeated at 360 so periodic curves close.
fn closed(deg: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x = deg.to_vec();
    let mut y = values.to_vec();
    if let (Some(first), Some(start)) = (values.first(), deg.first()) {
        x.push(start + 360.0);
        y.push(*first);
    }
    (x, y)
}

fn regression_inputs(cfg: &Config) -> Result<(Prepared, pipeline::Regression)> {
    let variant = pipeline::primary_variant(cfg)?;
    let single = Config { variant: variant.label().into(), ..cfg.clone() };
    let (prepared, fits) = fit_prepared(&single)?;
    let reg = pipeline::regression(&single, &prepared, &fits, &cfg.covariate)?;
    Ok((prepared, reg))
}

fn band_svgs(reg: &pipeline::Regression, bands: &circspline::BootstrapBands) -> Result<Vec<(String, String)>> {
    let deg: Vec<f64> = bands.grid.iter().map(|t| t.to_degrees()).collect();
    (0..bands.estimate.len())
        .map(|j| {
            let name = if j == 0 { "intercept".to_string() } else { reg.covariate.clone() };
            let kind = match bands.kind {
                circspline::BandKind::Pointwise => "pointwise",
                circspline::BandKind::Simultaneous => "simultaneous",
            };
            let title = format!("clr(beta{j}) [{name}], {:.0}% {kind} band", 100.0 * bands.level);
            let (x, est) = closed(&deg, &bands.estimate[j]);
            let (_, lo) = closed(&deg, &bands.lower[j]);
            let (_, hi) = closed(&deg, &bands.upper[j]);
            let svg = svg::band_plot(&title, "direction (compass degrees)", &x, &est, &lo, &hi)?;
            Ok((format!("band_beta{j}.svg"), svg))
        })
        .collect()
}

pub fn regress(cfg: &Config) -> Result<Outputs> {
    let (prepared, reg) = regression_inputs(cfg)?;
    let grid = pipeline::evaluation_grid(cfg)?;
    let bands = pipeline::bootstrap(cfg, &reg, &grid)?;
    let report = pipeline::regression_report(&reg, &bands)?;
    let mut out = Outputs::default();
    with_warnings(&prepared, &mut out);
    for s in circspline::fosreg::significance_summary(&bands) {
        out.messages.push(format!(
            "beta{}: {}",
            s.parameter,
            if s.contains_zero_everywhere {
                "band contains zero everywhere (not significant)".to_string()
            } else {
                format!("band excludes zero on {} interval(s)", s.exclusion_intervals.len())
            }
        ));
    }
    out.json("regression_report.json", &report)?;
    for (name, svg) in band_svgs(&reg, &bands)? {
        out.add(name, svg);
    }
    finish(cfg, out)
}

pub fn predict(cfg: &Config) -> Result<Outputs> {
    if cfg.at.is_empty() {
        return Err(CliError::Config("predict needs covariate values (--at)".into()));
    }
    let (prepared, reg) = regression_inputs(cfg)?;
    let grid = pipeline::evaluation_grid(cfg)?;
    let dens = pipeline::predictions(&reg, &cfg.at, &grid)?;
    let deg: Vec<f64> = grid.points().iter().map(|t| t.to_degrees()).collect();
    let mut out = Outputs::default();
    with_warnings(&prepared, &mut out);
    let rows: Vec<Value> = cfg
        .at
        .iter()
        .zip(&dens)
        .map(|(x, d)| json!({ "covariate_value": x, "density": d.values(), "integral": d.integral() }))
        .collect();
    out.json(
        "predictions.json",
        &json!({
            "variant": reg.variant.label(),
            "covariate": reg.covariate,
            "grid_compass_deg": deg,
            "grid_math_deg": deg.iter().map(|d| pipeline::compass_to_math_deg(*d)).collect::<Vec<_>>(),
            "predictions": rows,
        }),
    )?;
    let series: Vec<Series> = cfg
        .at
        .iter()
        .zip(&dens)
        .map(|(x, d)| Series::new(format!("{} = {x}", reg.covariate), grid.points().to_vec(), d.values().to_vec()))
        .collect();
    out.add("predictions_polar.svg", svg::polar_curves("Predicted densities", &series)?);
    let linear: Vec<Series> = series
        .iter()
        .map(|s| {
            let (x, y) = closed(&deg, &s.ys);
            Series::new(s.label.clone(), x, y)
        })
        .collect();
    out.add(
        "predictions_density.svg",
        svg::linear_curves("Predicted densities", "direction (compass degrees)", "density", &linear)?,
    );
    finish(cfg, out)
}

/// Plot styles understood by [`plot`].
pub const STYLES: [&str; 6] = ["linear-curve", "multi-curve", "histogram", "rose", "polar-curve", "band-plot"];

fn select_month<'a>(cfg: &Config, months: &'a [MonthData]) -> Result<&'a MonthData> {
    match &cfg.month {
        None => months.first().ok_or_else(|| CliError::Input("no months to plot".into())),
        Some(label) => months
            .iter()
            .find(|m| m.label() == label)
            .ok_or_else(|| CliError::Input(format!("month {label} not present in the data"))),
    }
}

pub fn plot(cfg: &Config) -> Result<Outputs> {
    let style = cfg
        .style
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("plot needs --style, one of {}", STYLES.join(", "))))?;
    if !STYLES.contains(&style) {
        return Err(CliError::Config(format!("unknown plot style {style:?}; expected one of {}", STYLES.join(", "))));
    }
    let mut out = Outputs::default();
    if style == "band-plot" {
        let (prepared, reg) = regression_inputs(cfg)?;
        with_warnings(&prepared, &mut out);
        let grid = pipeline::evaluation_grid(cfg)?;
        let bands = pipeline::bootstrap(cfg, &reg, &grid)?;
        for (name, svg) in band_svgs(&reg, &bands)? {
            out.add(name, svg);
        }
        return finish(cfg, out);
    }
    let variant = pipeline::primary_variant(cfg)?;
    let single = Config { variant: variant.label().into(), ..cfg.clone() };
    let prepared = pipeline::prepare(&single)?;
    with_warnings(&prepared, &mut out);
    let grid = pipeline::evaluation_grid(cfg)?;
    let deg: Vec<f64> = grid.points().iter().map(|t| t.to_degrees()).collect();
    let knots = single.knot_config()?;
    let params = single.params()?;
    let fit_month = |m: &MonthData| {
        pipeline::fit_histogram(&m.histogram, &knots, variant, params.for_variant(variant), cfg.cyclic)
    };
    let (name, svg) = match style {
        "multi-curve" => {
            let fits = pipeline::fit_months(&single, &prepared.months)?;
            let series = fits
                .iter()
                .map(|f| {
                    let (x, y) = closed(&deg, pipeline::spline_clr(&f.fit.spline, &grid)?.values());
                    Ok(Series::new(f.month.clone(), x, y))
                })
                .collect::<Result<Vec<_>>>()?;
            let title = format!("clr splines, variant ({variant}), {} months", series.len());
            ("multi-curve.svg".to_string(), svg::linear_curves(&title, "direction (compass degrees)", "clr", &series)?)
        }
        _ => {
            let m = select_month(cfg, &prepared.months)?;
            let h = &m.histogram;
            let label = m.label();
            let svg = match style {
                "histogram" => {
                    let edges: Vec<f64> = h.bin_edges.iter().map(|t| t.to_degrees()).collect();
                    svg::histogram(&format!("Relative frequencies {label}"), "direction (compass degrees)", "relative frequency", &edges, &h.rel_freq)?
                }
                "rose" => svg::rose(&format!("Rose diagram {label}"), &h.rel_freq, &m.directions())?,
                "linear-curve" => {
                    let fit = fit_month(m)?;
                    let clr = pipeline::spline_clr(&fit.spline, &grid)?;
                    let mid: Vec<f64> = h.midpoints().iter().map(|t| t.to_degrees()).collect();
                    svg::linear_curves(
                        &format!("clr spline {label}, variant ({variant})"),
                        "direction (compass degrees)",
                        "clr",
                        &[
                            {
                                let (x, y) = closed(&deg, clr.values());
                                Series::new("spline", x, y)
                            },
                            Series::new("discrete clr", mid, h.clr_values.clone()),
                        ],
                    )?
                }
                _ => {
                    let fit = fit_month(m)?;
                    let d = pipeline::spline_density(&fit.spline, &grid)?;
                    svg::polar_curves(
                        &format!("Density {label}, variant ({variant})"),
                        &[Series::new(label, grid.points().to_vec(), d.values().to_vec())],
                    )?
                }
            };
            (format!("{style}_{label}.svg"), svg)
        }
    };
    out.add(name, svg);
    finish(cfg, out)
}

/// Writes a synthetic data set; `cfg.input` names the CSV to create.
pub fn simulate(cfg: &Config, spec: &SimulationSpec) -> Result<Outputs> {
    let mut buf = Vec::new();
    write_csv(spec, cfg.seed, &mut buf)?;
    let name = cfg
        .input
        .clone()
        .ok_or_else(|| CliError::Config("simulate needs --input naming the CSV to create".into()))?;
    let mut out = Outputs::default();
    out.messages.push(format!("{} months of synthetic records", spec.months));
    out.add(name, String::from_utf8(buf).expect("simulated CSV is ASCII"));
    Ok(out)
}

/// Parses a comma list of numbers such as `7,10,13`.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| f64::from_str(t.trim()).map_err(|_| CliError::Config(format!("{t:?} is not a number"))))
        .collect()
}

/// Convenience for callers that want a variant by label.
pub fn variant(label: &str) -> Result<Variant> {
    Variant::from_str(label)
}
