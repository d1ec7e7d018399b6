use thiserror::Error;

use crate::optimizers::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The iterate left the finite region; carries everything recorded before the blow-up.
    #[error("iterate diverged at t = {t}")]
    Divergence { t: usize, trace: Box<Trace> },

    #[error("parameters outside the supported regime: {0}")]
    Regime(String),

    #[error("no fixed point: expected clipped gradient has no sign change on [{lo}, {hi}]")]
    NoFixedPoint { lo: f64, hi: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
