use serde::Serialize;
use thiserror::Error;

/// Errors raised by the model, optimizer and simulator.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its requested accuracy.
    #[error("numeric error: {what} (estimate {estimate:e}, error {error:e}, {evaluations} evaluations)")]
    Numeric {
        what: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    /// The objective has more than one local minimum on the bracket.
    #[error("ambiguous minimum: {} candidate minima at {candidates:?}", candidates.len())]
    Ambiguous { candidates: Vec<f64> },

    /// The objective is flat on the bracket; no minimizer is defined.
    #[error("degenerate objective: relative range {range:e} on [{lo:e}, {hi:e}]")]
    Degenerate { lo: f64, hi: f64, range: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        // negated so NaN fails the check
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !($cond) {
            return Err($crate::error::Error::Domain(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
