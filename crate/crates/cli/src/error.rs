use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 input, 3 numerical, 4 config.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Config(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Wraps a core error with context, classifying it by kind.
    pub fn core(context: impl std::fmt::Display, err: circspline::Error) -> Self {
        use circspline::Error as E;
        let msg = format!("{context}: {err}");
        match err {
            E::Singular(_)
            | E::SchoenbergWhitney { .. }
            | E::DegenerateGcv { .. }
            | E::Numerical(_) => CliError::Numerical(msg),
            _ => CliError::Input(msg),
        }
    }
}
