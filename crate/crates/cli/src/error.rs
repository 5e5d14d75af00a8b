use inlsv_core::Error;

/// Failure classes, mapped one-to-one onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Precondition(_) => 1,
            Self::Numeric(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::OutOfRange(_) => Self::Precondition(e.to_string()),
            Error::NoConvergence(_) | Error::NumericOverflow(_) => Self::Numeric(e.to_string()),
        }
    }
}
