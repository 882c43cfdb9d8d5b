use finsler_core::FinslerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] FinslerError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for usage errors, 2 for domain and numerical errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Core(FinslerError::InvalidInput(_) | FinslerError::Unsupported(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}
