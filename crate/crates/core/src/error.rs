use std::fmt;

/// Errors produced by the tensor algebra, spectral and bound routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index {index:?} out of range for shape {shape:?}")]
    Index {
        index: Vec<usize>,
        shape: Vec<usize>,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A precondition on the input (symmetry, definiteness, dominance) does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    Solver { sweeps: usize, off_norm: f64 },

    #[error("no power-iteration start converged (best residual {best_residual:e})")]
    Estimation { best_residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),

    #[error("theorem not applicable: {0}")]
    InapplicableTheorem(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl fmt::Display) -> Self {
        Error::Shape(msg.to_string())
    }

    pub(crate) fn contract(msg: impl fmt::Display) -> Self {
        Error::Contract(msg.to_string())
    }

    pub(crate) fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
