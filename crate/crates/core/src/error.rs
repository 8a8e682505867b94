use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A basis could not be constructed (singular interpolation system, unsupported parameters).
    #[error("basis construction failed: {0}")]
    Construction(String),
    /// An operation was called with inputs that violate its documented contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge for element {element} (difference {difference:e})")]
    QuadratureNotConverged { element: String, difference: f64 },
    /// The iterative solver for the implicit stage did not converge.
    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    SolverStalled { iterations: usize, residual: f64 },
    /// The discrete solution became non-finite or exceeded the blow-up threshold.
    #[error("solution diverged at step {step} (t = {time}, norm = {norm:e})")]
    Divergence { step: usize, time: f64, norm: f64 },
    /// The configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
