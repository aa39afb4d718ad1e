//! Process-level error classification: every failure maps to one of the
//! documented exit codes.

use thiserror::Error;

/// Errors surfaced by the command-line entry points.
#[derive(Debug, Error)]
pub enum AppError {
    /// Unreadable, ill-formed, or inconsistent input (exit code 2).
    #[error("{0}")]
    Input(String),
    /// The requested configuration admits no solution (exit code 3).
    #[error("{0}")]
    Infeasible(String),
    /// EM aborted on a non-finite likelihood (exit code 4).
    #[error("{0}")]
    Diverged(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Input(_) => 2,
            AppError::Infeasible(_) => 3,
            AppError::Diverged(_) => 4,
        }
    }
}

impl From<gmix_core::Error> for AppError {
    fn from(e: gmix_core::Error) -> Self {
        match e {
            gmix_core::Error::Infeasible(_) => AppError::Infeasible(e.to_string()),
            gmix_core::Error::Diverged { .. } => AppError::Diverged(e.to_string()),
            other => AppError::Input(other.to_string()),
        }
    }
}

/// Wraps a filesystem error with the path it concerns.
pub fn io_error(path: &std::path::Path, e: std::io::Error) -> AppError {
    AppError::Input(format!("{}: {e}", path.display()))
}

pub type AppResult<T> = std::result::Result<T, AppError>;
