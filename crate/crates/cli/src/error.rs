use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    /// A flag or config entry that could not be used.
    Config { field: String, message: String },
    Io { path: PathBuf, message: String },
    Core(rkhs_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// One-line JSON diagnostic for stderr.
    pub fn diagnostic(&self) -> Value {
        match self {
            CliError::Config { field, message } => {
                json!({"error": "ConfigParse", "field": field, "message": message})
            }
            CliError::Io { path, message } => {
                json!({"error": "FileIO", "path": path.display().to_string(), "message": message})
            }
            CliError::Core(e) => {
                let mut v = json!({"error": e.kind(), "message": e.to_string()});
                if let rkhs_core::Error::Spec { field, .. } = e {
                    v["field"] = json!(field);
                }
                v
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "{field}: {message}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rkhs_core::Error> for CliError {
    fn from(e: rkhs_core::Error) -> Self {
        CliError::Core(e)
    }
}
