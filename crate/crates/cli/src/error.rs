use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("tolerance breach: {0}")]
    Tolerance(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) => 2,
            CliError::Tolerance(_) => 3,
        }
    }
}

impl From<fyk_core::Error> for CliError {
    fn from(e: fyk_core::Error) -> Self {
        match e {
            fyk_core::Error::Domain(m) => CliError::Usage(m),
            fyk_core::Error::Numeric { .. } => CliError::Numeric(e.to_string()),
            fyk_core::Error::Tolerance { .. } => CliError::Tolerance(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
