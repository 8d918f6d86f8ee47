use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit codes used by the command line front end.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const NUMERIC: i32 = 2;
    pub const INTERNAL: i32 = 3;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("f{component} failed at (t, u, v) = ({t}, {u}, {v}): {source}")]
    EvalAt {
        component: usize,
        t: f64,
        u: f64,
        v: f64,
        #[source]
        source: EvalError,
    },

    #[error("nonnegativity violated: f{component}({t}, {u}, {v}) = {value:e} < 0")]
    Negative { component: usize, t: f64, u: f64, v: f64, value: f64 },

    #[error("problem file rejected:\n  - {}", .0.join("\n  - "))]
    Schema(Vec<String>),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("kernel not positive on interval [{a}, {b}] (inf of the interval integral is {value:e})")]
    NotPositive { a: f64, b: f64, value: f64 },

    #[error("intervals differ: [{0}, {1}] vs [{2}, {3}]")]
    IntervalsDiffer(f64, f64, f64, f64),

    #[error("quadrature did not converge: best estimate {estimate:e}, achieved error {achieved:e}")]
    Quadrature { estimate: f64, achieved: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last quotient {last:e})")]
    PowerIteration { iterations: usize, last: f64 },

    #[error("Neumann series divergent: (mu - eps) * r = {0:e} >= 1")]
    NeumannDivergent(f64),

    #[error("singular Jacobian (condition estimate {0:e})")]
    SingularJacobian(f64),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Parse(_)
            | Error::Schema(_)
            | Error::Negative { .. }
            | Error::NotPositive { .. }
            | Error::IntervalsDiffer(..)
            | Error::Io { .. }
            | Error::Json(_) => exit_code::VALIDATION,
            Error::Eval(_)
            | Error::EvalAt { .. }
            | Error::ZeroDenominator(_)
            | Error::Quadrature { .. }
            | Error::PowerIteration { .. }
            | Error::NeumannDivergent(_)
            | Error::SingularJacobian(_)
            | Error::Diverged(_) => exit_code::NUMERIC,
            Error::Internal(_) => exit_code::INTERNAL,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
