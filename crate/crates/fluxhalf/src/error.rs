//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by kinematics, integrand assembly, quadrature and the
/// closed-form evaluators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the validity range of an operation
    /// (negative wavenumber, refractive index below one, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested evaluation is outside the domain the numerical path
    /// can serve (for example a non-positive cutoff timescale).
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// The quadrature budget was exhausted before the error target was met.
    /// Carries the best value obtained and the error actually achieved.
    #[error("quadrature did not converge: value={value:e}, error_estimate={error_estimate:e}, evaluations={evaluations}")]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        evaluations: u64,
    },

    /// The requested quantity diverges in the zero-cutoff limit.
    #[error("quantity diverges for eta = 0; use the ideal renormalized form instead")]
    DivergentLimit,

    /// The ideal renormalized density diverges at the interface.
    #[error("renormalized density diverges at the interface z = 0")]
    SurfaceDivergence,
}

pub type Result<T> = std::result::Result<T, Error>;
