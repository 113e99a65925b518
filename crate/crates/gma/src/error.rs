use std::path::Path;

use thiserror::Error;

/// Every failure path of the binary, one exit code each.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Usage(String),
}

pub const EXIT_CODES: &str = "Exit codes:
  0   success
  1   I/O error (missing input, unwritable output)
  2   validation error (polytope not simple, vertex compatibility fails, degenerate geometry)
  3   parse error (malformed JSON or schema violation in the problem file)
  4   solver error (Newton failure, no chart, quadrature did not converge)
  5   verification failure under --strict
  64  usage error (bad flags or tolerances)";

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Verification(_) => 5,
            CliError::Usage(_) => 64,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}
