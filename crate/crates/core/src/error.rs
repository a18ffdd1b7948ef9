use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function it was passed to.
    #[error("{name} = {value} is outside the valid domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The harvester cannot deliver the requested DC power at any input.
    #[error(
        "harvest target {target_mw} mW is unreachable: the harvester saturates at {saturation_mw} mW"
    )]
    InfeasibleTarget { target_mw: f64, saturation_mw: f64 },

    /// A configuration field violates its invariant.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("channel estimate rejected: {0}")]
    Channel(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than I/O.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::InfeasibleTarget { .. }
                | Error::Config { .. }
                | Error::Channel(_)
                | Error::Json { .. }
        )
    }
}
