use thiserror::Error;

/// Failures of a CLI run, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("resource guard: {0}")]
    Guard(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

impl From<henchman_core::Error> for CliError {
    fn from(e: henchman_core::Error) -> Self {
        match e {
            henchman_core::Error::ResourceGuard { .. } => CliError::Guard(e.to_string()),
            henchman_core::Error::NonConvergence { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
