//! Run configuration: defaults, TOML file, then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use circspline::fosreg::{BandKind, DEFAULT_LEVEL, DEFAULT_REPLICATES};
use circspline::KnotConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

/// One of the four compared fit variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// smoothing spline, `l = 1`
    A,
    /// smoothing spline, `l = 2`
    B,
    /// P-spline, `d = 1`
    C,
    /// P-spline, `d = 2`
    D,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::A, Variant::B, Variant::C, Variant::D];

    pub fn label(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
            Variant::D => "d",
        }
    }

    pub fn is_smoothing(self) -> bool {
        matches!(self, Variant::A | Variant::B)
    }

    /// Derivative order `l` or difference order `d`.
    pub fn order(self) -> usize {
        match self {
            Variant::A | Variant::C => 1,
            Variant::B | Variant::D => 2,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            "d" => Ok(Variant::D),
            other => Err(CliError::Config(format!("unknown variant {other:?}; expected a, b, c or d"))),
        }
    }
}

/// `a`, `b`, `c`, `d`, a comma list of them, or `all`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantSelection(pub Vec<Variant>);

impl VariantSelection {
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self(Variant::ALL.to_vec()));
        }
        let mut v = s.split(',').map(Variant::from_str).collect::<Result<Vec<_>>>()?;
        v.sort();
        v.dedup();
        if v.is_empty() {
            return Err(CliError::Config("empty variant selection".into()));
        }
        Ok(Self(v))
    }
}

impl fmt::Display for VariantSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == Variant::ALL {
            return f.write_str("all");
        }
        let labels: Vec<&str> = self.0.iter().map(|v| v.label()).collect();
        f.write_str(&labels.join(","))
    }
}

/// Smoothing (`α`) or penalization (`ρ`) parameter choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamChoice {
    Auto,
    Fixed(f64),
}

/// `auto`, a single value, or per-variant values such as `a=0.927,c=0.07`.
/// Variants not listed are optimised.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    default: ParamChoice,
    per_variant: Vec<(Variant, f64)>,
}

impl ParamSpec {
    pub fn auto() -> Self {
        Self { default: ParamChoice::Auto, per_variant: Vec::new() }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::auto());
        }
        if !s.contains('=') {
            let v = parse_positive(s)?;
            return Ok(Self { default: ParamChoice::Fixed(v), per_variant: Vec::new() });
        }
        let mut per_variant = Vec::new();
        for part in s.split(',') {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("malformed parameter entry {part:?}")))?;
            let variant = Variant::from_str(name)?;
            if per_variant.iter().any(|(v, _)| *v == variant) {
                return Err(CliError::Config(format!("parameter for variant {variant} given twice")));
            }
            per_variant.push((variant, parse_positive(value)?));
        }
        per_variant.sort_by_key(|(v, _)| *v);
        Ok(Self { default: ParamChoice::Auto, per_variant })
    }

    pub fn for_variant(&self, v: Variant) -> ParamChoice {
        self.per_variant
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(self.default, |(_, p)| ParamChoice::Fixed(*p))
    }
}

fn parse_positive(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("parameter {s:?} is not a number")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::Config(format!("parameter {v} must be positive")));
    }
    Ok(v)
}

impl fmt::Display for ParamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.per_variant.is_empty() {
            let parts: Vec<String> = self.per_variant.iter().map(|(v, p)| format!("{v}={p}")).collect();
            return f.write_str(&parts.join(","));
        }
        match self.default {
            ParamChoice::Auto => f.write_str("auto"),
            ParamChoice::Fixed(p) => write!(f, "{p}"),
        }
    }
}

/// Inner knots: a count of equidistant knots or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KnotSpec {
    Count(usize),
    List(Vec<f64>),
}

impl KnotSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if let Ok(g) = s.trim().parse::<usize>() {
            return Ok(KnotSpec::Count(g));
        }
        s.split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(KnotSpec::List)
            .map_err(|_| CliError::Config(format!("--knots {s:?}: expected a count or a comma list")))
    }

    /// Knots on `[0, 2π]`.
    pub fn build(&self, degree: usize) -> Result<KnotConfig> {
        let cfg = match self {
            KnotSpec::Count(g) => KnotConfig::circular(degree, *g),
            KnotSpec::List(list) => KnotConfig::new(0.0, std::f64::consts::TAU, degree, list.clone()),
        };
        cfg.map_err(|e| CliError::Config(format!("knots: {e}")))
    }
}

/// Replacement of empty histogram bins before the log-ratio transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroStrategy {
    /// add the pseudo-count to every bin
    Additive,
    /// give empty bins the pseudo-count and shrink the others to keep the total
    Multiplicative,
    /// fail on any empty bin
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Columns {
    pub timestamp: String,
    pub direction: String,
    pub speed: String,
}

impl Default for Columns {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            direction: "wind_dir_deg".into(),
            speed: "wind_speed_kmh".into(),
        }
    }
}

/// Every setting that influences outputs; persisted as `effective_config.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub bins: usize,
    pub knots: KnotSpec,
    pub degree: usize,
    pub variant: String,
    pub param: String,
    pub cyclic: bool,
    pub bootstrap: usize,
    pub level: f64,
    pub band: BandKind,
    pub zero_strategy: ZeroStrategy,
    pub pseudo_count: f64,
    pub malformed_threshold: f64,
    pub grid_points: usize,
    /// Regression covariate: `time` or a numeric column name.
    pub covariate: String,
    /// Covariate values for `predict`.
    pub at: Vec<f64>,
    /// Month selected by `plot`; the first month when absent.
    pub month: Option<String>,
    pub style: Option<String>,
    pub columns: Columns,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            input: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            bins: 36,
            knots: KnotSpec::Count(9),
            degree: 3,
            variant: "a".into(),
            param: "auto".into(),
            cyclic: false,
            bootstrap: DEFAULT_REPLICATES,
            level: DEFAULT_LEVEL,
            band: BandKind::Pointwise,
            zero_strategy: ZeroStrategy::Additive,
            pseudo_count: 0.5,
            malformed_threshold: 0.01,
            grid_points: 360,
            covariate: "time".into(),
            at: Vec::new(),
            month: None,
            style: None,
            columns: Columns::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("serializing config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 4 {
            return Err(CliError::Config(format!("bins = {} must be at least 4", self.bins)));
        }
        if self.degree < 1 {
            return Err(CliError::Config("degree must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Config(format!("level {} must lie in (0, 1)", self.level)));
        }
        if self.bootstrap < circspline::fosreg::MIN_REPLICATES {
            return Err(CliError::Config(format!(
                "bootstrap = {} is below the minimum of {}",
                self.bootstrap,
                circspline::fosreg::MIN_REPLICATES
            )));
        }
        if !(self.pseudo_count > 0.0 && self.pseudo_count.is_finite()) {
            return Err(CliError::Config("pseudo_count must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.malformed_threshold) {
            return Err(CliError::Config("malformed_threshold must lie in [0, 1)".into()));
        }
        if self.grid_points < 8 {
            return Err(CliError::Config("grid_points must be at least 8".into()));
        }
        self.variants()?;
        self.params()?;
        let knots = self.knot_config()?;
        if self.bins < knots.g() + 1 {
            return Err(CliError::Config(format!(
                "{} bins cannot support {} inner knots (need bins >= g + 1)",
                self.bins,
                knots.g()
            )));
        }
        Ok(())
    }

    pub fn variants(&self) -> Result<VariantSelection> {
        VariantSelection::parse(&self.variant)
    }

    pub fn params(&self) -> Result<ParamSpec> {
        ParamSpec::parse(&self.param)
    }

    pub fn knot_config(&self) -> Result<KnotConfig> {
        self.knots.build(self.degree)
    }

    pub fn write_effective(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(EFFECTIVE_CONFIG);
        std::fs::write(&path, self.to_toml()?).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
