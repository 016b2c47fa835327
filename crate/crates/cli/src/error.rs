use std::path::Path;

use polling_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 rejected configuration, 2 input/output, 3 numerical, 4 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 4,
            CliError::Io { .. } | CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Rejected(_) | Error::InvalidParameter(_) => 1,
                Error::Domain { .. }
                | Error::EventBudget { .. }
                | Error::SpectralFailure { .. }
                | Error::NotSupercritical { .. }
                | Error::Inconsistent(_)
                | Error::Degenerate(_) => 3,
            },
        }
    }
}
