//! Front-end failures. Library errors pass through untouched; the
//! variants here cover file handling, schema problems, and the
//! finite-cell contract on emitted CSV.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },

    /// Semantic config problems, each prefixed with its field path.
    #[error("config: {0}")]
    Invalid(String),

    #[error("epsilon table {path}, line {line}: {what}")]
    EpsilonTable {
        path: PathBuf,
        line: usize,
        what: String,
    },

    #[error("FADECAP_WORKERS must be a worker count, got {0:?}")]
    Workers(String),

    /// A value headed for a CSV cell was NaN or infinite. Emitting it
    /// would poison downstream parsers, so the run aborts instead.
    #[error("refusing to emit non-finite value {value} in column {column}")]
    NonFinite { column: &'static str, value: f64 },

    #[error(transparent)]
    Core(#[from] fadecap::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
