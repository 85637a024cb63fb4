//! Scenario runner and acceptance suite behind the `spin7` binary.

pub mod commands;
pub mod report;
pub mod scenario;
pub mod suite;

use spin7_dynamics::DynError;
use spin7_fields::FieldError;
use spin7_linear::LinearError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for bad input, 3 for a numerical abort. Failed checks exit with 1 elsewhere.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Spec(_) => CliError::Config(e.to_string()),
            FieldError::Degenerate { .. } | FieldError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            FieldError::Snapshot(_) | FieldError::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<DynError> for CliError {
    fn from(e: DynError) -> Self {
        match e {
            DynError::Params(_) | DynError::SingularKappa(_) => CliError::Config(e.to_string()),
            DynError::Degenerate { .. } => CliError::Numerical(e.to_string()),
            DynError::Field(f) => f.into(),
        }
    }
}

impl From<LinearError> for CliError {
    fn from(e: LinearError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
