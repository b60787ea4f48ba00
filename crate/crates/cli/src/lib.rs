//! Wind-direction pipeline: ingest hourly records, bin them per month, fit
//! periodic zero-integral splines to the clr histograms, and report
//! statistics, regressions and plots.

pub mod binning;
pub mod commands;
pub mod config;
mod error;
pub mod ingest;
pub mod pipeline;
pub mod simulate;
pub mod svg;

pub use error::{CliError, Result};
