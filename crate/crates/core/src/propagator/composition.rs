//! Composition of propagators across an intermediate time.
//!
//! `∫ dξ K(x, ξ; t − τ) K(ξ, x'; τ)` is a conditionally convergent chirp
//! integral. It is evaluated with a smooth window around the classical
//! crossing point: outside the window the integrand has no stationary phase,
//! so a C^∞ taper leaves a truncation error that decays faster than any
//! power of the window size.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::aperture::ApertureFunction;
use crate::error::{DitError, Result};
use crate::math::free_propagator_unchecked;
use crate::propagator::{PreparedKernel, PropagatorQuery};
use crate::quadrature::{gauss_legendre_10, QuadratureSettings};

/// Window and resolution of the intermediate-point integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionGrid {
    /// Half-width of the flat part of the window.
    pub half_width: f64,
    /// Width of the smooth fall-off on each side.
    pub taper: f64,
    /// Width of one 10-point Gauss–Legendre panel.
    pub panel: f64,
    /// Truncation estimates above this (relative to the composed value) are logged.
    pub warn_threshold: f64,
}

impl Default for CompositionGrid {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            taper: 20.0,
            panel: 0.025,
            warn_threshold: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionDefect {
    /// `K(x, x'; t)`
    pub direct: Complex64,
    /// `∫ dξ K_outer(x, ξ; t − τ) K(ξ, x'; τ)`
    pub composed: Complex64,
    /// `|direct − composed|`
    pub defect: f64,
    /// Change of `composed` when the window is shrunk by a quarter.
    pub truncation_estimate: f64,
    /// Whether the outer factor was the free propagator (shutter already off).
    pub free_outer: bool,
}

fn window(distance: f64, flat: f64, taper: f64) -> f64 {
    if distance <= flat {
        return 1.0;
    }
    if distance >= flat + taper {
        return 0.0;
    }
    let s = (distance - flat) / taper;
    let rise = (-1.0 / s).exp();
    let fall = (-1.0 / (1.0 - s)).exp();
    fall / (rise + fall)
}

/// Defect of the composition law at an intermediate time `tau_mid`.
///
/// The second leg uses the aperture as seen from `tau_mid` on. When the
/// shutter is fully open from some `t_f ≤ tau_mid` on, that leg is the free
/// propagator and the defect must vanish.
pub fn composition_defect(
    q: &PropagatorQuery,
    a: &ApertureFunction,
    tau_mid: f64,
    qs: &QuadratureSettings,
    grid: &CompositionGrid,
) -> Result<CompositionDefect> {
    if !(tau_mid > 0.0 && tau_mid < q.t) {
        return Err(DitError::Domain(format!(
            "intermediate time must satisfy 0 < τ < t, got τ = {tau_mid}, t = {}",
            q.t
        )));
    }
    if !(grid.half_width > 0.0 && grid.taper > 0.0 && grid.panel > 0.0) {
        return Err(DitError::InvalidGrid("composition window sizes must be positive".into()));
    }
    let pc = q.constants;
    let outer_time = q.t - tau_mid;
    let direct = PreparedKernel::new(a, q.t, pc, qs).eval(q.x, q.x_src)?;
    let inner = PreparedKernel::new(a, tau_mid, pc, qs);
    let free_outer = a.open_after().is_some_and(|tf| tf <= tau_mid);
    let outer = if free_outer {
        None
    } else {
        Some(PreparedKernel::new(&a.shifted(tau_mid)?, outer_time, pc, qs))
    };

    let center = q.x_src + (q.x - q.x_src) * tau_mid / q.t;
    let reach = grid.half_width + grid.taper;
    let short_flat = 0.75 * grid.half_width;
    let (lo, hi) = (center - reach, center + reach);
    let mut segments = vec![];
    if lo < 0.0 && hi > 0.0 {
        segments.push((lo, 0.0));
        segments.push((0.0, hi));
    } else {
        segments.push((lo, hi));
    }

    let mut panels = Vec::new();
    for (a0, b0) in segments {
        let n = ((b0 - a0) / grid.panel).ceil().max(1.0) as usize;
        let h = (b0 - a0) / n as f64;
        panels.extend((0..n).map(|k| (a0 + k as f64 * h, h)));
    }
    let nodes = gauss_legendre_10();

    let partial: Vec<Result<(Complex64, Complex64)>> = panels
        .par_iter()
        .map(|&(start, h)| {
            let mid = start + 0.5 * h;
            let mut full = Complex64::new(0.0, 0.0);
            let mut short = Complex64::new(0.0, 0.0);
            for &(node, weight) in &nodes {
                for xi in [mid - 0.5 * h * node, mid + 0.5 * h * node] {
                    let d = (xi - center).abs();
                    let w_full = window(d, grid.half_width, grid.taper);
                    if w_full == 0.0 {
                        continue;
                    }
                    let k_in = inner.eval(xi, q.x_src)?;
                    let k_out = match &outer {
                        None => free_outer_kernel(q.x - xi, outer_time, &pc),
                        Some(k) => k.eval(q.x, xi)?,
                    };
                    let term = k_out * k_in * (0.5 * h * weight);
                    full += term * w_full;
                    short += term * window(d, short_flat, grid.taper);
                }
            }
            Ok((full, short))
        })
        .collect();

    let mut composed = Complex64::new(0.0, 0.0);
    let mut composed_short = Complex64::new(0.0, 0.0);
    for p in partial {
        let (f, s) = p?;
        composed += f;
        composed_short += s;
    }
    let truncation_estimate = (composed - composed_short).norm();
    if truncation_estimate > grid.warn_threshold * composed.norm().max(direct.norm()) {
        log::warn!(
            "composition integral may be truncated: window change moves it by {truncation_estimate:e}"
        );
    }
    Ok(CompositionDefect {
        direct,
        composed,
        defect: (direct - composed).norm(),
        truncation_estimate,
        free_outer,
    })
}

#[inline]
fn free_outer_kernel(z: f64, t: f64, pc: &crate::math::PhysicalConstants) -> Complex64 {
    free_propagator_unchecked(z, t, pc)
}
