//! The shutter propagator `K(x, x'; t)`.
//!
//! Three independent evaluation routes are provided:
//!
//! * [`k_staircase`] — closed form for piecewise-constant apertures, a finite
//!   sum of `erf(Φ)` terms;
//! * [`k_general_route_a`] — quadrature of the Huygens–Fresnel integral
//!   `∫₀ᵗ u K₀(x, t−τ) χ(τ) K₀(−x', τ) dτ` along steepest-descent contours;
//! * [`k_general_route_b`] — the integrated-by-parts form `∫ χ'(τ) erf(Φ) dτ`
//!   for piecewise-linear apertures, taken along the same contours.

mod composition;
mod contour;
mod route_b;
mod staircase;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aperture::{ApertureFunction, SampledAperture, StaircaseAperture};
use crate::error::{DitError, Result};
use crate::math::PhysicalConstants;
use crate::quadrature::QuadratureSettings;

pub use composition::{composition_defect, CompositionDefect, CompositionGrid};
pub use contour::k_general_route_a;
pub use route_b::k_general_route_b;
pub use staircase::StaircaseKernel;

/// A point `(x, x', t)` at which the propagator is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorQuery {
    pub x: f64,
    pub x_src: f64,
    pub t: f64,
    pub constants: PhysicalConstants,
}

impl PropagatorQuery {
    /// Rejects on-barrier points: `K` jumps across `x = 0`, so no single
    /// value is meaningful there.
    pub fn new(x: f64, x_src: f64, t: f64, constants: PhysicalConstants) -> Result<Self> {
        constants.validate()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(DitError::Domain(format!("propagation time must be positive, got {t}")));
        }
        check_off_barrier(x, "x")?;
        check_off_barrier(x_src, "x'")?;
        Ok(Self { x, x_src, t, constants })
    }

    pub fn atomic(x: f64, x_src: f64, t: f64) -> Result<Self> {
        Self::new(x, x_src, t, PhysicalConstants::default())
    }

    /// `K₀(x − x', t)`
    pub fn free(&self) -> Complex64 {
        crate::math::free_propagator_unchecked(self.x - self.x_src, self.t, &self.constants)
    }

    /// Stationary point of the Huygens–Fresnel phase: the time at which the
    /// classical path from `x'` to `x` crosses the shutter.
    pub fn crossing_time(&self) -> f64 {
        self.t * self.x_src.abs() / (self.x.abs() + self.x_src.abs())
    }
}

fn check_off_barrier(v: f64, name: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(DitError::Domain(format!("{name} must be finite, got {v}")));
    }
    if v == 0.0 {
        return Err(DitError::Domain(format!(
            "{name} = 0 lies on the shutter, where the propagator is discontinuous and undefined"
        )));
    }
    Ok(())
}

/// `Ξ(x, x') = [1 + sgn(x) sgn(x')] / 2`: 1 on the same side of the shutter, 0 otherwise.
pub fn xi(x: f64, x_src: f64) -> Result<f64> {
    check_off_barrier(x, "x")?;
    check_off_barrier(x_src, "x'")?;
    Ok(xi_unchecked(x, x_src))
}

#[inline]
pub(crate) fn xi_unchecked(x: f64, x_src: f64) -> f64 {
    if (x > 0.0) == (x_src > 0.0) {
        1.0
    } else {
        0.0
    }
}

/// `u(x, x'; t, τ) = −(sgn(x')/2) (x/(t−τ) − x'/τ)`.
pub fn u_factor(x: f64, x_src: f64, t: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < t) {
        return Err(DitError::Domain(format!("u needs 0 < τ < t, got τ = {tau}, t = {t}")));
    }
    check_off_barrier(x_src, "x'")?;
    Ok(-0.5 * x_src.signum() * (x / (t - tau) - x_src / tau))
}

/// Closed-form propagator for a staircase aperture.
pub fn k_staircase(q: &PropagatorQuery, a: &StaircaseAperture) -> Complex64 {
    StaircaseKernel::new(a, q.t, q.constants).eval(q.x, q.x_src)
}

/// A propagator evaluator for fixed aperture and time, dispatching to the
/// preferred route.
#[derive(Debug, Clone)]
pub enum PreparedKernel {
    Staircase(StaircaseKernel),
    Sampled {
        aperture: SampledAperture,
        t: f64,
        constants: PhysicalConstants,
        settings: QuadratureSettings,
    },
}

impl PreparedKernel {
    pub fn new(a: &ApertureFunction, t: f64, constants: PhysicalConstants, settings: &QuadratureSettings) -> Self {
        match a {
            ApertureFunction::Staircase(s) => Self::Staircase(StaircaseKernel::new(s, t, constants)),
            ApertureFunction::Sampled(s) => Self::Sampled {
                aperture: s.clone(),
                t,
                constants,
                settings: *settings,
            },
        }
    }

    pub fn route(&self) -> Route {
        match self {
            Self::Staircase(_) => Route::StaircaseClosedForm,
            Self::Sampled { .. } => Route::ErfQuadrature,
        }
    }

    /// `K(x, x'; t)`; both positions must be off the barrier.
    pub fn eval(&self, x: f64, x_src: f64) -> Result<Complex64> {
        match self {
            Self::Staircase(k) => Ok(k.eval(x, x_src)),
            Self::Sampled { aperture, t, constants, settings } => {
                let q = PropagatorQuery { x, x_src, t: *t, constants: *constants };
                k_general_route_b(&q, aperture, settings)
            }
        }
    }
}

/// Which evaluation route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    StaircaseClosedForm,
    ContourQuadrature,
    ErfQuadrature,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::StaircaseClosedForm => "staircase-closed-form",
            Route::ContourQuadrature => "contour-quadrature",
            Route::ErfQuadrature => "erf-quadrature",
        })
    }
}

/// Preferred route: closed form for staircases, erf quadrature
/// for sampled apertures.
pub fn preferred_route(a: &ApertureFunction) -> Route {
    match a {
        ApertureFunction::Staircase(_) => Route::StaircaseClosedForm,
        ApertureFunction::Sampled(_) => Route::ErfQuadrature,
    }
}

pub fn evaluate(q: &PropagatorQuery, a: &ApertureFunction, qs: &QuadratureSettings) -> Result<(Complex64, Route)> {
    let route = preferred_route(a);
    let value = match a {
        ApertureFunction::Staircase(s) => k_staircase(q, s),
        ApertureFunction::Sampled(s) => k_general_route_b(q, s, qs)?,
    };
    Ok((value, route))
}

/// Evaluate many queries, in parallel.
pub fn evaluate_batch(
    queries: &[PropagatorQuery],
    a: &ApertureFunction,
    qs: &QuadratureSettings,
) -> Vec<Result<Complex64>> {
    queries
        .par_iter()
        .map(|q| evaluate(q, a, qs).map(|(v, _)| v))
        .collect()
}
