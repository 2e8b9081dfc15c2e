use thiserror::Error;

use crate::orbit_lab::OrbitReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integration exceeded {steps} steps at t = {t} (step size collapsed)")]
    MaxStepsExceeded { t: f64, steps: usize },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("singular configuration: separation {separation:e} below threshold")]
    SingularConfiguration { separation: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("finite-difference probe produced a non-finite value")]
    NonFiniteOutput,

    #[error(
        "gradient mismatch at index {index}: analytic {analytic}, finite-difference {reference}"
    )]
    GradientMismatch {
        index: usize,
        analytic: f64,
        reference: f64,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNotConverged { sweeps: usize },

    #[error("line search failed to satisfy the Wolfe conditions (nc = {value:e})")]
    LineSearchFailure { value: f64, best: Box<OrbitReport> },

    #[error(
        "optimizer stopped after {iterations} iterations without reaching gtol (nc = {value:e})"
    )]
    DidNotConverge {
        iterations: usize,
        value: f64,
        best: Box<OrbitReport>,
    },

    #[error("deformed start flowed back to the original solution (distance {distance:e})")]
    ReconvergedToOriginal {
        distance: f64,
        report: Box<OrbitReport>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
