use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which side of a tuning comparison produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuningState {
    Before,
    After,
}

impl fmt::Display for TuningState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TuningState::Before => f.write_str("before"),
            TuningState::After => f.write_str("after"),
        }
    }
}

/// Broad error class, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} = {value} is out of range (expected {expected})")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("diffraction order {order} does not propagate (grating sine {sine:.9} >= 1)")]
    EvanescentOrder { order: u32, sine: f64 },

    #[error("total internal reflection (n_in sin(theta) / n_out = {ratio:.9} > 1)")]
    TotalInternalReflection { ratio: f64 },

    #[error("first diffraction null lies beyond the horizon (medium wavelength / slit = {ratio:.9} >= 1)")]
    NullBeyondHorizon { ratio: f64 },

    #[error("adaptive quadrature did not converge on [{lo}, {hi}] (error estimate {estimate:e})")]
    QuadratureFailure { lo: f64, hi: f64, estimate: f64 },

    #[error("solved refractive index {index} is outside the material range (1.0, 2.5]")]
    OutOfMaterialRange { index: f64 },

    #[error("target {target} is outside the reachable interval [{low}, {high}]")]
    Infeasible { target: f64, low: f64, high: f64 },

    #[error("forward metric is not monotone over the voltage bracket [{lo} V, {hi} V]")]
    NonMonotonic { lo: f64, hi: f64 },

    #[error("bisection did not reach tolerance after {iterations} steps")]
    NonConvergent { iterations: usize },

    #[error("unsupported design: {0}")]
    UnsupportedDesign(String),

    #[error("{state} state: {source}")]
    InState {
        state: TuningState,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable variant name for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "OutOfRange",
            Error::EvanescentOrder { .. } => "EvanescentOrder",
            Error::TotalInternalReflection { .. } => "TotalInternalReflection",
            Error::NullBeyondHorizon { .. } => "NullBeyondHorizon",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::OutOfMaterialRange { .. } => "OutOfMaterialRange",
            Error::Infeasible { .. } => "Infeasible",
            Error::NonMonotonic { .. } => "NonMonotonic",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::UnsupportedDesign(_) => "UnsupportedDesign",
            Error::InState { source, .. } => source.kind(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::OutOfRange { .. } | Error::UnsupportedDesign(_) => ErrorCategory::Validation,
            Error::InState { source, .. } => source.category(),
            _ => ErrorCategory::Numerical,
        }
    }

    pub(crate) fn in_state(self, state: TuningState) -> Self {
        Error::InState {
            state,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_range(
    field: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<f64> {
    if ok && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            field,
            value,
            expected,
        })
    }
}
