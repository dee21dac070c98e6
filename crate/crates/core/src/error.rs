use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to reach its target.
    #[error("numeric failure in {what}: {detail}")]
    Numeric { what: &'static str, detail: String },
    /// A computed quantity missed a stated tolerance.
    #[error("tolerance breach in {what}: got {got:e}, allowed {allowed:e}")]
    Tolerance {
        what: &'static str,
        got: f64,
        allowed: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            what,
            detail: detail.into(),
        }
    }
}
