use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Everything that ends a run with exit code 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("{file}: {source}")]
    InFile {
        file: String,
        #[source]
        source: Box<CliError>,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{experiment}: {source}")]
    Core {
        experiment: &'static str,
        #[source]
        source: vdlab_core::Error,
    },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn in_file(self, path: &Path) -> Self {
        CliError::InFile {
            file: path.display().to_string(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
