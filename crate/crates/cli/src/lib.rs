//! Library side of the `hinv` binary: sweep configuration and runners, and
//! the circuit compile driver.

pub mod compile;
pub mod sweep;

use hidden_inverse::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: configuration, circuit text, or an unusable path.
    #[error("{0}")]
    Config(String),
    /// A computation failed a numerical check.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse { .. }
            | CoreError::Config(_)
            | CoreError::Io(_)
            | CoreError::InvalidGate(_)
            | CoreError::InvalidCircuit(_)
            | CoreError::QubitRange(_)
            | CoreError::OutOfRange(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}
