use thiserror::Error;

use crate::statespec::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (shifted Cholesky failed at pivot {pivot})")]
    NotPositive { pivot: usize },

    #[error("trace {trace} deviates from 1 beyond the tail allowance {allowance:.3e}")]
    BadTrace { trace: f64, allowance: f64 },

    #[error("ordering parameter {s} outside {range}")]
    OutOfRange { s: f64, range: &'static str },

    #[error("singular ordering conversion from {from} to {to} (tau = {tau:.3e})")]
    SingularConversion { from: f64, to: f64, tau: f64 },

    #[error("singular parameter: {reason}")]
    SingularParameter { reason: &'static str },

    #[error("integrand does not decay on the grid (boundary/max = {ratio:.3e})")]
    Divergence { ratio: f64 },

    #[error("grid too small: boundary/max = {ratio:.3e} exceeds {limit:.1e}")]
    GridTooSmall { ratio: f64, limit: f64 },

    #[error("P function is singular for this state (boundary/max = {ratio:.3e})")]
    PSingular { ratio: f64 },

    #[error("truncation did not converge: dims {dims:?}, successive differences {diffs:?}")]
    TruncationNonConvergence { dims: Vec<usize>, diffs: Vec<f64> },

    #[error("numerical cancellation too large: noise estimate {noise:.3e} exceeds {limit:.1e}")]
    Boundedness { noise: f64, limit: f64 },

    #[error("truncation: {0}")]
    Truncation(&'static str),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Short machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension { .. } => "invalid-dimension",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotHermitian { .. } => "not-hermitian",
            Error::NotPositive { .. } => "not-positive",
            Error::BadTrace { .. } => "bad-trace",
            Error::OutOfRange { .. } => "out-of-range",
            Error::SingularConversion { .. } => "singular-conversion",
            Error::SingularParameter { .. } => "singular-parameter",
            Error::Divergence { .. } => "divergence",
            Error::GridTooSmall { .. } => "grid-too-small",
            Error::PSingular { .. } => "p-singular",
            Error::TruncationNonConvergence { .. } => "truncation-nonconvergence",
            Error::Boundedness { .. } => "boundedness",
            Error::Truncation(_) => "truncation",
            Error::Parse(_) => "parse",
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularConversion { .. }
                | Error::SingularParameter { .. }
                | Error::Divergence { .. }
                | Error::GridTooSmall { .. }
                | Error::PSingular { .. }
                | Error::TruncationNonConvergence { .. }
                | Error::Boundedness { .. }
                | Error::Truncation(_)
        )
    }
}
