use thiserror::Error;

pub type Result<T> = std::result::Result<T, CertError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    /// The requested (group, method) pairing has no implementation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A statistic produced NaN; carries a short diagnostics dump.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl CertError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CertError::Domain(msg.into())
    }
}
