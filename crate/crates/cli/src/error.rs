use std::path::Path;

use fermi_ee::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 2 for bad input, 3 for runs that could not be completed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::Resource(_) | Error::Numeric { .. } | Error::Geometry(_) => 3,
                _ => 2,
            },
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) => 3,
        }
    }
}
