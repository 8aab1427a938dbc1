//! Exact propagator for a quantum particle in one dimension crossing a
//! point-like absorbing shutter whose transparency `χ(t)` varies in time.
//!
//! The crate is layered bottom-up:
//!
//! * [`math`] — free propagator, the `Φ` kernel, and the complex error function;
//! * [`aperture`] — staircase and piecewise-linear aperture functions;
//! * [`quadrature`] — adaptive Gauss–Kronrod integration of complex integrands;
//! * [`propagator`] — closed-form and quadrature evaluation of `K(x, x'; t)`;
//! * [`evolution`] — wave packets, densities and Husimi distributions;
//! * [`verify`] — residual checks for every defining property of the model.

pub mod aperture;
pub mod error;
pub mod evolution;
pub mod math;
pub mod propagator;
pub mod quadrature;
pub mod verify;

pub use aperture::{ApertureFunction, Jump, LinearPiece, SampledAperture, StaircaseAperture};
pub use error::{DitError, Result};
pub use math::PhysicalConstants;
pub use num_complex::Complex64;
pub use propagator::{PropagatorQuery, Route};
pub use quadrature::QuadratureSettings;
