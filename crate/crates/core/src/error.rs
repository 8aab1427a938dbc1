use thiserror::Error;

/// Errors raised by the propagator engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DitError {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid aperture: {0}")]
    InvalidAperture(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {estimate:e}, requested {requested:e})")]
    Quadrature {
        estimate: f64,
        requested: f64,
        subdivisions: usize,
    },

    /// A wavefunction is not negligible at the edge of its grid.
    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, DitError>;
