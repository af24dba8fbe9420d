use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Compute { context: String, source: cubic_metrology::Error },

    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn compute(context: impl Into<String>) -> impl FnOnce(cubic_metrology::Error) -> Self {
        let context = context.into();
        move |source| CliError::Compute { context, source }
    }

    /// 1 for computation failures, 2 for bad configuration or output paths.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute { .. } | CliError::Internal(_) => 1,
            CliError::Config(_) | CliError::Output { .. } => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
