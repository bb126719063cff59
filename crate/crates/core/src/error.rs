use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Vectors or matrices that must agree in size do not.
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what}{}", at_tick(*.tick))]
    NonFinite {
        what: &'static str,
        tick: Option<usize>,
    },

    /// A genome or parameter value lies outside its segment bounds.
    #[error("{segment}[{index}] = {value} is outside [{lower}, {upper}]")]
    OutOfBounds {
        segment: &'static str,
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}line {line}: {message}", path_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("closed loop diverged: {0}")]
    Unstable(String),

    #[error("{0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn at_tick(tick: Option<usize>) -> String {
    tick.map(|t| format!(" at tick {t}")).unwrap_or_default()
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    path.as_ref()
        .map(|p| format!("{}: ", p.display()))
        .unwrap_or_default()
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file path to parse errors produced by an in-memory parser.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(p.into()),
                line,
                message,
            },
            other => other,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
