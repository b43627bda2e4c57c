use thiserror::Error;

/// Errors raised by the inference library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function (negative Bessel
    /// argument, non-finite angle, non-positive noise variance).
    #[error("domain error: {0}")]
    Domain(String),

    /// Vectors whose lengths must agree do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The von Mises mean direction is undefined for a zero shaping parameter.
    #[error("mean direction undefined for the uniform distribution")]
    UndefinedMean,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
