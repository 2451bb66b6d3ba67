//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A spec/config field violates its invariant. `field` names the offender.
    InvalidSpec { field: &'static str, message: String },
    /// Requested operator or basis exceeds the configured dimension budget.
    DimensionBudget { dim: usize, budget: usize },
    /// A vector length does not match the operator dimension.
    LengthMismatch { expected: usize, got: usize },
    /// Basis index out of range.
    IndexOutOfRange { index: usize, limit: usize },
    /// Quadrature order too low for the requested basis size; carries the
    /// observed orthonormality residual.
    QuadratureInsufficient { residual: f64 },
    /// Dense path requested above the dense threshold.
    DenseThreshold { dim: usize, threshold: usize },
    /// Too few inputs for the requested analysis (sweep levels, fit points, ...).
    TooFewItems { what: &'static str, needed: usize, got: usize },
    /// Sweep truncations must be nested and nondecreasing.
    NotNested,
    /// Normal equations singular: degenerate fit region.
    SingularFit,
    /// Fit did not converge within the iteration budget.
    FitNonConvergence { iterations: usize, rms_residual: f64 },
    /// Energies listed as distinct contain an unmerged duplicate.
    DegenerateEnergies { index: usize },
    /// Micro-canonical window indices must be consecutive in sector order.
    NonConsecutiveWindow,
    /// Empty selection (window, sector, ...).
    EmptySelection { what: &'static str },
    /// Amplitude vector is not normalized.
    NotNormalized { norm: f64 },
    /// Regge fit `c` coefficient must be positive for density estimates.
    NonPositiveSlope { c: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec { field, message } => {
                write!(f, "invalid spec: field `{field}`: {message}")
            }
            Error::DimensionBudget { dim, budget } => {
                write!(f, "dimension {dim} exceeds budget {budget}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::IndexOutOfRange { index, limit } => {
                write!(f, "index {index} out of range (limit {limit})")
            }
            Error::QuadratureInsufficient { residual } => write!(
                f,
                "quadrature order insufficient: orthonormality residual {residual:.3e}"
            ),
            Error::DenseThreshold { dim, threshold } => {
                write!(f, "dimension {dim} above dense threshold {threshold}")
            }
            Error::TooFewItems { what, needed, got } => {
                write!(f, "too few {what}: need at least {needed}, got {got}")
            }
            Error::NotNested => write!(f, "truncation levels must be nested (nondecreasing)"),
            Error::SingularFit => write!(f, "singular normal equations: degenerate fit region"),
            Error::FitNonConvergence {
                iterations,
                rms_residual,
            } => write!(
                f,
                "fit did not converge after {iterations} iterations (rms residual {rms_residual:.3e})"
            ),
            Error::DegenerateEnergies { index } => {
                write!(f, "duplicate energy at index {index}: merge degenerate levels first")
            }
            Error::NonConsecutiveWindow => {
                write!(f, "window indices must be consecutive in sector order")
            }
            Error::EmptySelection { what } => write!(f, "empty selection: {what}"),
            Error::NotNormalized { norm } => {
                write!(f, "amplitudes not normalized: |c|^2 sums to {norm}")
            }
            Error::NonPositiveSlope { c } => {
                write!(f, "n-slope c = {c} must be positive")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidSpec {
        field,
        message: message.into(),
    }
}
