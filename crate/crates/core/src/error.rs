use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("outcome space of {atoms} atoms exceeds the cap of {cap}")]
    CapExceeded { atoms: u128, cap: u128 },

    #[error("invalid source model: {0}")]
    InvalidModel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("outcome {0} has zero mass")]
    ZeroMassOutcome(usize),

    #[error("argument {value} out of range for {what}")]
    OutOfRange { what: String, value: f64 },

    #[error("curve `{0}` does not satisfy the monotonicity condition required here")]
    NotAdmissible(String),

    #[error("unknown curve `{0}`")]
    UnknownCurve(String),

    #[error("rate-distortion solver did not converge: slope bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },

    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
