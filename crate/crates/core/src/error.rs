use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("symbol '{symbol}' is not in the alphabet {alphabet:?}")]
    Alphabet { symbol: char, alphabet: Vec<char> },

    /// A validator rejected a value; `defect` is the measured violation.
    #[error("{what} failed validation (defect {defect:.3e})")]
    Validation { what: String, defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("machine never halts: {0}")]
    NonTermination(String),

    #[error("well-formedness violated: {0}")]
    WellFormedness(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
