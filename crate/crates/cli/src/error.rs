use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid JSON: {0}")]
    Json(#[source] serde_json::Error),

    #[error("{location}: {message}")]
    Schema { location: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{command}: {source}")]
    Core {
        command: String,
        #[source]
        source: starcalc_core::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CliError>,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn in_file(self, path: &std::path::Path) -> CliError {
        match self {
            CliError::Io { .. } => self,
            other => CliError::InFile {
                path: path.to_owned(),
                source: Box::new(other),
            },
        }
    }

    /// 3 for solver failures, 2 for everything else (bad input, schema,
    /// precondition, I/O). Failed reports are signalled separately with 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core { source, .. } if source.is_solver_failure() => 3,
            CliError::InFile { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
