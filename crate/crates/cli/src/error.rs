use ssc_core::SscError;
use thiserror::Error;

use crate::formats::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {} (line {}, column {}, byte offset {})", .error.message, .error.line, .error.column, .error.byte_offset)]
    Parse { path: String, error: ParseError },
    #[error("{0}")]
    Config(String),
    #[error("invalid input:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] SscError),
}

impl CliError {
    /// 2 for input and configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) | CliError::Core(SscError::DegenerateBaseline) => 3,
            _ => 2,
        }
    }
}
