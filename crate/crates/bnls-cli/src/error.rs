//! Error channel carrying the process exit code: 2 for numerical failures,
//! 3 for configuration errors, 4 for missing inputs.

use bnls::error::BnlsError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    MissingInput(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Numerical(_) => 2,
            CliError::MissingInput(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::MissingInput(m) => m,
        }
    }
}

impl From<BnlsError> for CliError {
    fn from(e: BnlsError) -> Self {
        match e {
            BnlsError::InvalidGrid(_)
            | BnlsError::InvalidParams(_)
            | BnlsError::GridMismatch(_)
            | BnlsError::Format(_) => CliError::Config(e.to_string()),
            BnlsError::Io(_) => CliError::MissingInput(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::MissingInput(e.to_string())
    }
}
