use std::path::PathBuf;

/// Errors produced while configuring or running simulations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// A configuration file could not be parsed.
    #[error("failed to parse configuration: {0}")]
    Parse(String),

    /// A function was called outside of its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("sweep cell `{cell}` (seed {seed}) failed: {source}")]
    Cell {
        cell: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }

    /// True for errors caused by user input rather than by execution.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation { .. } | Error::Parse(_) | Error::UnknownPreset { .. } => true,
            Error::Cell { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
