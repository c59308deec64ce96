use std::path::PathBuf;

use sarg04_core::QkdError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}", path = path.display())]
    Config { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}", path = path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] QkdError),
    #[error("no distance in {0} admits a consistent attack model")]
    InfeasibleEverywhere(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InfeasibleEverywhere(_) => 2,
            _ => 1,
        }
    }
}
