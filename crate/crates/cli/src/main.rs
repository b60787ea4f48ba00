use std::path::PathBuf;
use std::process::ExitCode;

use circspline::fosreg::BandKind;
use circspline_cli::commands::{self, parse_list, Outputs};
use circspline_cli::config::{Config, KnotSpec, ZeroStrategy};
use circspline_cli::simulate::SimulationSpec;
use circspline_cli::{CliError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "circspline", version, about = "Periodic spline analysis of monthly wind-direction densities")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input CSV (header: timestamp, wind_dir_deg, wind_speed_kmh)
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Histogram bins per month
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Number of equidistant inner knots, or a comma list of knots in (0, 2π)
    #[arg(long, global = true)]
    knots: Option<String>,
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// a, b, c, d, a comma list, or all
    #[arg(long, global = true)]
    variant: Option<String>,
    /// auto, a value, or per-variant values like a=0.927,c=0.07
    #[arg(long, global = true)]
    param: Option<String>,
    /// Bootstrap replicates
    #[arg(long, global = true)]
    bootstrap: Option<usize>,
    /// Band level
    #[arg(long, global = true)]
    level: Option<f64>,
    #[arg(long, global = true, value_enum)]
    band: Option<Band>,
    /// Wrap-around differences in the P-spline penalty
    #[arg(long, global = true)]
    cyclic: bool,
    #[arg(long, global = true, value_enum)]
    zero_strategy: Option<Zeros>,
    #[arg(long, global = true)]
    pseudo_count: Option<f64>,
    /// Evaluation grid size for curves and bands
    #[arg(long, global = true)]
    grid_points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Band {
    Pointwise,
    Simultaneous,
}

#[derive(Clone, Copy, ValueEnum)]
enum Zeros {
    Additive,
    Multiplicative,
    Reject,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and bin the records; report row accounting
    Ingest,
    /// Fit every month with the selected variants
    Fit,
    /// Circular and functional statistics
    Stats,
    /// Function-on-scalar regression with bootstrap bands
    Regress {
        /// `time` or a numeric column averaged per month
        #[arg(long)]
        covariate: Option<String>,
    },
    /// Predicted densities for covariate values
    Predict {
        #[arg(long)]
        covariate: Option<String>,
        /// Comma list of covariate values
        #[arg(long)]
        at: Option<String>,
    },
    /// Write an SVG plot
    Plot {
        /// linear-curve, multi-curve, histogram, rose, polar-curve or band-plot
        #[arg(long)]
        style: Option<String>,
        /// YYYY-MM; defaults to the first month
        #[arg(long)]
        month: Option<String>,
        #[arg(long)]
        covariate: Option<String>,
    },
    /// Generate synthetic hourly records into the --input path
    Simulate {
        #[arg(long, default_value_t = 120)]
        months: usize,
        #[arg(long, default_value_t = 2014)]
        start_year: i32,
        #[arg(long, default_value_t = 24)]
        hours_per_day: u32,
        /// Change of the south-west weight from first to last month
        #[arg(long, default_value_t = 0.0)]
        trend: f64,
        /// Change of the south-west weight per km/h
        #[arg(long, default_value_t = 0.02)]
        speed_effect: f64,
    },
}

fn effective_config(g: &Global) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(v) = &g.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = &g.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = g.bins {
        cfg.bins = v;
    }
    if let Some(v) = &g.knots {
        cfg.knots = KnotSpec::parse(v)?;
    }
    if let Some(v) = g.degree {
        cfg.degree = v;
    }
    if let Some(v) = &g.variant {
        cfg.variant = v.clone();
    }
    if let Some(v) = &g.param {
        cfg.param = v.clone();
    }
    if let Some(v) = g.bootstrap {
        cfg.bootstrap = v;
    }
    if let Some(v) = g.level {
        cfg.level = v;
    }
    if let Some(v) = g.band {
        cfg.band = match v {
            Band::Pointwise => BandKind::Pointwise,
            Band::Simultaneous => BandKind::Simultaneous,
        };
    }
    if g.cyclic {
        cfg.cyclic = true;
    }
    if let Some(v) = g.zero_strategy {
        cfg.zero_strategy = match v {
            Zeros::Additive => ZeroStrategy::Additive,
            Zeros::Multiplicative => ZeroStrategy::Multiplicative,
            Zeros::Reject => ZeroStrategy::Reject,
        };
    }
    if let Some(v) = g.pseudo_count {
        cfg.pseudo_count = v;
    }
    if let Some(v) = g.grid_points {
        cfg.grid_points = v;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = effective_config(&cli.global)?;
    let outputs: Outputs = match cli.command {
        Command::Simulate { months, start_year, hours_per_day, trend, speed_effect } => {
            let spec = SimulationSpec { months, start_year, hours_per_day, trend, speed_effect, ..Default::default() };
            let out = commands::simulate(&cfg, &spec)?;
            // the CSV path is taken as given, not relative to --out-dir
            for (path, contents) in &out.files {
                std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
            }
            report(&out, 0, None);
            return Ok(());
        }
        command => {
            match &command {
                Command::Regress { covariate } => set(&mut cfg.covariate, covariate),
                Command::Predict { covariate, at } => {
                    set(&mut cfg.covariate, covariate);
                    if let Some(at) = at {
                        cfg.at = parse_list(at)?;
                    }
                }
                Command::Plot { style, month, covariate } => {
                    set(&mut cfg.covariate, covariate);
                    if style.is_some() {
                        cfg.style = style.clone();
                    }
                    if month.is_some() {
                        cfg.month = month.clone();
                    }
                }
                _ => {}
            }
            cfg.validate()?;
            match command {
                Command::Ingest => commands::ingest(&cfg)?,
                Command::Fit => commands::fit(&cfg)?,
                Command::Stats => commands::stats(&cfg)?,
                Command::Regress { .. } => commands::regress(&cfg)?,
                Command::Predict { .. } => commands::predict(&cfg)?,
                Command::Plot { .. } => commands::plot(&cfg)?,
                Command::Simulate { .. } => unreachable!("handled above"),
            }
        }
    };
    let written = outputs.write(&cfg.out_dir)?;
    report(&outputs, written.len(), Some(&cfg.out_dir));
    Ok(())
}

fn set(slot: &mut String, value: &Option<String>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn report(out: &Outputs, written: usize, dir: Option<&PathBuf>) {
    for m in &out.messages {
        if m.starts_with("warning:") {
            eprintln!("{m}");
        } else {
            println!("{m}");
        }
    }
    if let Some(dir) = dir {
        println!("wrote {written} file(s) to {}", dir.display());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
