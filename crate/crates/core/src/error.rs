use std::path::PathBuf;

use thiserror::Error;

use crate::optimize::OptimizationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve needs at least 4 samples, got {0}")]
    TooFewSamples(usize),

    #[error("degenerate edge: points[{index}] and points[{next}] coincide")]
    DegenerateEdge { index: usize, next: usize },

    #[error("non-finite coordinate at points[{0}]")]
    NonFinite(usize),

    #[error("index {index} out of range for curve with {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("samples {i} and {j} coincide; energy is singular")]
    Singular { i: usize, j: usize },

    #[error("sampling is not arclength-uniform (edge spread {spread:.3e} > {limit:.1e}); resample first")]
    NonUniformSampling { spread: f64, limit: f64 },

    #[error("group order {m} does not divide sample count {n}; resample to a multiple of {m}")]
    IncompatibleGrid { m: usize, n: usize },

    #[error("curve is not symmetric under the action (residual {residual:.3e} > {tol:.1e})")]
    NotSymmetric { residual: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("line search stalled at iteration {iteration}: {reason}")]
    Stall {
        iteration: usize,
        reason: String,
        trace: Box<OptimizationTrace>,
    },

    #[error("malformed curve file {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Stall { .. } | Error::NoConvergence(_) | Error::Singular { .. }
        )
    }
}
