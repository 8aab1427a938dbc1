//! Kernel primitives: the `√(c/(i t))` branch, the free-particle propagator,
//! the `Φ` kernel and the complex error function.
//!
//! Every function here is pure. The `*_unchecked` variants skip argument
//! validation and are used on hot paths after a query has been validated once.

mod erf;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DitError, Result};

pub use erf::erf_complex;
pub(crate) use erf::erf;

/// `e^{-iπ/4}`, the principal value of `√(1/i)`.
pub const SQRT_MINUS_I: Complex64 = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);

/// Particle mass and reduced Planck constant, in consistent units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub mass: f64,
    pub hbar: f64,
}

impl Default for PhysicalConstants {
    /// Atomic units, `m = ħ = 1`.
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        let pc = Self { mass, hbar };
        pc.validate()?;
        Ok(pc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(DitError::Domain(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(DitError::Domain(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }

    /// `m/ħ`
    #[inline]
    pub fn m_over_hbar(&self) -> f64 {
        self.mass / self.hbar
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(DitError::Domain(format!("time must be positive and finite, got {t}")))
    }
}

/// `√(c/(i t))` on the principal branch, i.e. `√(c/t) · e^{-iπ/4}`.
pub fn branch_sqrt_inverse_it(t: f64, c: f64) -> Result<Complex64> {
    check_time(t)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(DitError::Domain(format!("expected a positive constant, got {c}")));
    }
    Ok(branch_sqrt_inverse_it_unchecked(t, c))
}

#[inline]
pub(crate) fn branch_sqrt_inverse_it_unchecked(t: f64, c: f64) -> Complex64 {
    SQRT_MINUS_I * (c / t).sqrt()
}

/// Free-particle propagator `K₀(z, t) = √(m/2πiħt) · exp(i m z²/2ħt)`.
pub fn free_propagator(z: f64, t: f64, pc: &PhysicalConstants) -> Result<Complex64> {
    check_time(t)?;
    if !z.is_finite() {
        return Err(DitError::Domain(format!("non-finite displacement {z}")));
    }
    Ok(free_propagator_unchecked(z, t, pc))
}

#[inline]
pub(crate) fn free_propagator_unchecked(z: f64, t: f64, pc: &PhysicalConstants) -> Complex64 {
    let k = pc.m_over_hbar();
    let prefactor = branch_sqrt_inverse_it_unchecked(t, k / (2.0 * PI));
    prefactor * Complex64::cis(0.5 * k * z * z / t)
}

/// `∂_z K₀(z, t) = (i m z / ħ t) · K₀(z, t)`.
pub fn free_propagator_dz(z: f64, t: f64, pc: &PhysicalConstants) -> Result<Complex64> {
    let k0 = free_propagator(z, t, pc)?;
    Ok(Complex64::new(0.0, pc.m_over_hbar() * z / t) * k0)
}

/// The kernel `Φ(x, x'; t, τ) = √(m/2iħt) (x √(τ/(t-τ)) + x' √((t-τ)/τ))`.
pub fn phi(x: f64, x_src: f64, t: f64, tau: f64, pc: &PhysicalConstants) -> Result<Complex64> {
    check_time(t)?;
    if !(tau > 0.0 && tau < t) {
        return Err(DitError::Domain(format!("Φ needs 0 < τ < t, got τ = {tau}, t = {t}")));
    }
    if !x.is_finite() || !x_src.is_finite() {
        return Err(DitError::Domain("non-finite position".into()));
    }
    Ok(phi_unchecked(x, x_src, t, tau, pc))
}

#[inline]
pub(crate) fn phi_unchecked(x: f64, x_src: f64, t: f64, tau: f64, pc: &PhysicalConstants) -> Complex64 {
    let ratio = (tau / (t - tau)).sqrt();
    phi_prefactor(t, pc) * (x * ratio + x_src / ratio)
}

/// `√(m/2iħt)`
#[inline]
pub(crate) fn phi_prefactor(t: f64, pc: &PhysicalConstants) -> Complex64 {
    branch_sqrt_inverse_it_unchecked(t, 0.5 * pc.m_over_hbar())
}
