//! Deterministic SVG plots: fixed 800×600 canvas, coordinates printed with
//! three decimals, no timestamps or random ids.

use std::f64::consts::TAU;
use std::fmt::Write;

use crate::error::{CliError, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 100.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
/// Polar plots: centre and outer radius.
const CX: f64 = 400.0;
const CY: f64 = 320.0;
const R_MAX: f64 = 240.0;

/// Three-decimal formatting with `-0.000` folded to `0.000`.
pub fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" { "0.000".into() } else { s }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A named curve; `xs` are abscissae or compass angles, depending on the plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Self { label: label.into(), xs, ys }
    }
}

fn check_series(curves: &[Series]) -> Result<()> {
    if curves.is_empty() {
        return Err(CliError::Input("nothing to plot: empty curve list".into()));
    }
    for c in curves {
        if c.xs.is_empty() || c.xs.len() != c.ys.len() {
            return Err(CliError::Input(format!("curve {:?} has mismatched or empty data", c.label)));
        }
        if c.xs.iter().chain(&c.ys).any(|v| !v.is_finite()) {
            return Err(CliError::Input(format!("curve {:?} contains non-finite values", c.label)));
        }
    }
    Ok(())
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = HEIGHT
    )
    .unwrap();
    writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#,
        num(WIDTH / 2.0),
        escape(title)
    )
    .unwrap();
    s
}

fn close(mut s: String) -> String {
    s.push_str("</svg>\n");
    s
}

/// Linear map from data ranges to the plotting rectangle.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    y_step: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = padded_range(xs, 0.0);
        let (lo, hi) = padded_range(ys, 0.05);
        let y_step = nice_step((hi - lo) / 4.0);
        let (y0, y1) = ((lo / y_step).floor() * y_step, (hi / y_step).ceil() * y_step);
        Self { x0, x1, y0, y1, y_step }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000000" stroke-width="1"/>"##,
            num(l),
            num(t),
            num(r - l),
            num(b - t)
        )
        .unwrap();
        for i in 0..=4 {
            let fx = self.x0 + (self.x1 - self.x0) * i as f64 / 4.0;
            let x = self.px(fx);
            writeln!(s, r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#000000"/>"##, num(x), num(b), num(b + 5.0)).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
                num(x),
                num(b + 20.0),
                tick_label(fx, (self.x1 - self.x0) / 4.0)
            )
            .unwrap();
        }
        let ticks = ((self.y1 - self.y0) / self.y_step).round() as usize;
        for i in 0..=ticks {
            let fy = self.y0 + self.y_step * i as f64;
            let y = self.py(fy);
            writeln!(s, r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#000000"/>"##, num(l - 5.0), num(y), num(l)).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
                num(l - 8.0),
                num(y + 4.0),
                nice_label(fy, self.y_step)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            num((l + r) / 2.0),
            num(HEIGHT - 15.0),
            escape(xlabel)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="20" y="{0}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            num((t + b) / 2.0),
            escape(ylabel)
        )
        .unwrap();
    }

    /// Dashed zero line, drawn on top of the data.
    fn zero_line(&self, s: &mut String) {
        if self.y0 < 0.0 && self.y1 > 0.0 {
            writeln!(
                s,
                r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#888888" stroke-dasharray="4 4"/>"##,
                num(LEFT),
                num(WIDTH - RIGHT),
                num(self.py(0.0))
            )
            .unwrap();
        }
    }

    fn polyline(&self, xs: &[f64], ys: &[f64]) -> String {
        let pts: Vec<String> =
            xs.iter().zip(ys).map(|(x, y)| format!("{},{}", num(self.px(*x)), num(self.py(*y)))).collect();
        pts.join(" ")
    }
}

/// Tick text with enough decimals to separate ticks `step` apart.
fn tick_label(v: f64, step: f64) -> String {
    let decimals = (2.0 - step.abs().log10().floor()).clamp(0.0, 10.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn nice_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Smallest 1, 2 or 5 times a power of ten that is at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&v| v >= raw * (1.0 - 1e-9)).unwrap_or(10.0 * mag)
}

fn padded_range(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        let d = lo.abs().max(1.0) * 0.5;
        return (lo - d, hi + d);
    }
    let d = (hi - lo) * pad;
    (lo - d, hi + d)
}

fn legend(s: &mut String, labels: &[&str]) {
    if labels.len() < 2 && labels.iter().all(|l| l.is_empty()) {
        return;
    }
    // long overlays (e.g. 120 months) would swamp the plot
    for (i, label) in labels.iter().enumerate().take(12) {
        let y = TOP + 15.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"/>"#,
            num(x),
            num(y),
            num(x + 20.0),
            PALETTE[i % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            num(x + 26.0),
            num(y + 4.0),
            escape(label)
        )
        .unwrap();
    }
}

/// One or more curves over a common linear abscissa.
pub fn linear_curves(title: &str, xlabel: &str, ylabel: &str, curves: &[Series]) -> Result<String> {
    check_series(curves)?;
    let frame = Frame::new(
        curves.iter().flat_map(|c| c.xs.iter().copied()),
        curves.iter().flat_map(|c| c.ys.iter().copied()),
    );
    let mut s = open(title);
    frame.axes(&mut s, xlabel, ylabel);
    for (i, c) in curves.iter().enumerate() {
        writeln!(
            s,
            r#"<polyline class="curve" data-label="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            escape(&c.label),
            PALETTE[i % PALETTE.len()],
            frame.polyline(&c.xs, &c.ys)
        )
        .unwrap();
    }
    frame.zero_line(&mut s);
    let labels: Vec<&str> = curves.iter().map(|c| c.label.as_str()).collect();
    legend(&mut s, &labels);
    Ok(close(s))
}

/// Bars over `[edges[i], edges[i+1]]`.
pub fn histogram(title: &str, xlabel: &str, ylabel: &str, edges: &[f64], values: &[f64]) -> Result<String> {
    if values.is_empty() || edges.len() != values.len() + 1 {
        return Err(CliError::Input("histogram needs m values and m + 1 edges".into()));
    }
    let frame = Frame::new(edges.iter().copied(), values.iter().copied().chain([0.0]));
    let mut s = open(title);
    frame.axes(&mut s, xlabel, ylabel);
    for (i, v) in values.iter().enumerate() {
        let (x0, x1) = (frame.px(edges[i]), frame.px(edges[i + 1]));
        let (y0, yv) = (frame.py(0.0), frame.py(*v));
        writeln!(
            s,
            r##"<rect class="bar" data-value="{}" x="{}" y="{}" width="{}" height="{}" fill="#9ecae1" stroke="#3182bd"/>"##,
            v,
            num(x0),
            num(yv.min(y0)),
            num(x1 - x0),
            num((y0 - yv).abs())
        )
        .unwrap();
    }
    Ok(close(s))
}

/// Screen point of a compass angle (north up, clockwise) at radius `r`.
fn compass_point(theta: f64, r: f64) -> (f64, f64) {
    (CX + r * theta.sin(), CY - r * theta.cos())
}

fn compass_frame(s: &mut String, rings: usize) {
    for i in 1..=rings {
        let r = R_MAX * i as f64 / rings as f64;
        writeln!(s, r##"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="#cccccc"/>"##, num(CX), num(CY), num(r)).unwrap();
    }
    for (k, label) in ["N", "E", "S", "W"].iter().enumerate() {
        let theta = k as f64 * TAU / 4.0;
        let (x, y) = compass_point(theta, R_MAX);
        writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#cccccc"/>"##, num(CX), num(CY), num(x), num(y)).unwrap();
        let (tx, ty) = compass_point(theta, R_MAX + 16.0);
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            num(tx),
            num(ty + 5.0),
            label
        )
        .unwrap();
    }
}

/// Rose diagram: sector `i` covers bin `i` and its area is proportional to
/// the relative frequency, so the radius goes with its square root. Raw
/// observations, when given, are drawn as dots outside the outer ring.
pub fn rose(title: &str, rel_freq: &[f64], raw: &[f64]) -> Result<String> {
    let m = rel_freq.len();
    if m == 0 || rel_freq.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(CliError::Input("rose needs non-negative frequencies".into()));
    }
    let f_max = rel_freq.iter().cloned().fold(0.0, f64::max);
    if f_max == 0.0 {
        return Err(CliError::Input("rose needs a non-zero frequency".into()));
    }
    let mut s = open(title);
    compass_frame(&mut s, 4);
    let w = TAU / m as f64;
    for (i, f) in rel_freq.iter().enumerate() {
        let r = R_MAX * (f / f_max).sqrt();
        let (t0, t1) = (i as f64 * w, (i + 1) as f64 * w);
        let (x0, y0) = compass_point(t0, r);
        let (x1, y1) = compass_point(t1, r);
        writeln!(
            s,
            r##"<path class="sector" data-freq="{}" data-start="{}" data-end="{}" data-radius="{}" d="M {} {} L {} {} A {} {} 0 0 1 {} {} Z" fill="#6baed6" fill-opacity="0.7" stroke="#08519c"/>"##,
            f,
            num(t0),
            num(t1),
            num(r),
            num(CX),
            num(CY),
            num(x0),
            num(y0),
            num(r),
            num(r),
            num(x1),
            num(y1)
        )
        .unwrap();
    }
    for theta in raw {
        let (x, y) = compass_point(*theta, R_MAX + 6.0);
        writeln!(s, r##"<circle class="obs" cx="{}" cy="{}" r="1.5" fill="#333333"/>"##, num(x), num(y)).unwrap();
    }
    Ok(close(s))
}

/// Closed curves `r(θ)` over compass angles; radii are scaled so the largest
/// value touches the outer ring.
pub fn polar_curves(title: &str, curves: &[Series]) -> Result<String> {
    check_series(curves)?;
    let r_top = curves.iter().flat_map(|c| c.ys.iter()).cloned().fold(0.0, f64::max);
    if r_top <= 0.0 || curves.iter().flat_map(|c| c.ys.iter()).any(|v| *v < 0.0) {
        return Err(CliError::Input("polar curves need non-negative radii with a positive maximum".into()));
    }
    let mut s = open(title);
    compass_frame(&mut s, 4);
    writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12">outer ring = {}</text>"#,
        num(HEIGHT - 15.0),
        num(r_top)
    )
    .unwrap();
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .xs
            .iter()
            .zip(&c.ys)
            .map(|(t, v)| {
                let (x, y) = compass_point(*t, R_MAX * v / r_top);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        writeln!(
            s,
            r#"<polygon class="curve" data-label="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            escape(&c.label),
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        )
        .unwrap();
    }
    let labels: Vec<&str> = curves.iter().map(|c| c.label.as_str()).collect();
    legend(&mut s, &labels);
    Ok(close(s))
}

/// Point estimate with a shaded band and the zero line.
pub fn band_plot(title: &str, xlabel: &str, grid: &[f64], estimate: &[f64], lower: &[f64], upper: &[f64]) -> Result<String> {
    let n = grid.len();
    if n == 0 || estimate.len() != n || lower.len() != n || upper.len() != n {
        return Err(CliError::Input("band plot needs equal-length grid, estimate and bounds".into()));
    }
    let frame = Frame::new(grid.iter().copied(), lower.iter().chain(upper).copied().chain([0.0]));
    let mut s = open(title);
    frame.axes(&mut s, xlabel, "clr");
    let mut pts: Vec<String> =
        grid.iter().zip(upper).map(|(x, y)| format!("{},{}", num(frame.px(*x)), num(frame.py(*y)))).collect();
    pts.extend(grid.iter().zip(lower).rev().map(|(x, y)| format!("{},{}", num(frame.px(*x)), num(frame.py(*y)))));
    writeln!(s, r##"<polygon class="band" fill="#c6dbef" stroke="none" points="{}"/>"##, pts.join(" ")).unwrap();
    writeln!(
        s,
        r##"<polyline class="estimate" fill="none" stroke="#08519c" stroke-width="2" points="{}"/>"##,
        frame.polyline(grid, estimate)
    )
    .unwrap();
    frame.zero_line(&mut s);
    Ok(close(s))
}
