use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("regularity violated at t = {t}; last safe t = {last_safe_t}: {reason}")]
    Regularity {
        t: f64,
        last_safe_t: f64,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cn_duality::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Regularity { .. } => 3,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                cn_duality::Error::Regularity(_)
                | cn_duality::Error::FlowCollision { .. }
                | cn_duality::Error::IntegrationAborted { .. } => 3,
                _ => 2,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
