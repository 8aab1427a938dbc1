//! Integrated-by-parts form
//! `K = Ξ [1 − χ(t)] K₀ + ½ (χ(0) + χ(t) + sgn(x') ∫₀ᵗ χ'(τ) erf Φ dτ) K₀`.
//!
//! `erf Φ` is bounded on `(0, t)` but oscillates without limit near both
//! endpoints, since `Φ² = −i (φ(τ) − m(x−x')²/2ħt)` with the same phase
//! `φ(τ) = A/τ + B/(t−τ)` as the Huygens–Fresnel integrand. Near `τ = 0`,
//! `erf Φ → sgn(x')`; near `τ = t`, `erf Φ → sgn(x)`, and the remainder
//! `erf Φ − sgn` decays like `e^{-p}` along the steepest-descent contours of
//! `φ`. The constant part is integrated exactly and only the remainder is
//! taken along the contours.

use num_complex::Complex64;

use crate::aperture::SampledAperture;
use crate::error::Result;
use crate::math::{erf, phi_prefactor};
use crate::propagator::contour::{Branch, Contour};
use crate::propagator::{xi_unchecked, PropagatorQuery};
use crate::quadrature::QuadratureSettings;

/// `W(a) = ∫₀ᵃ erf Φ(τ) dτ`, with the two contour integrals from the
/// stationary point cached.
struct ErfAntiderivative<'a> {
    contour: Contour,
    prefactor: Complex64,
    x: f64,
    x_src: f64,
    qs: &'a QuadratureSettings,
    saddle_down: Option<Complex64>,
    saddle_up: Option<Complex64>,
}

impl<'a> ErfAntiderivative<'a> {
    fn new(q: &PropagatorQuery, qs: &'a QuadratureSettings) -> Self {
        Self {
            contour: Contour::new(q),
            prefactor: phi_prefactor(q.t, &q.constants),
            x: q.x,
            x_src: q.x_src,
            qs,
            saddle_down: None,
            saddle_up: None,
        }
    }

    fn phi(&self, tau: Complex64) -> Complex64 {
        let ratio = (tau / (self.contour.t - tau)).sqrt();
        self.prefactor * (ratio * self.x + self.x_src / ratio)
    }

    /// `∫ (erf Φ − limit) dτ` from `start` to the end of `branch`.
    fn remainder(&self, start: f64, branch: Branch) -> Result<Complex64> {
        let limit = match branch {
            Branch::Down => self.x_src.signum(),
            Branch::Up => self.x.signum(),
        };
        self.contour.path(start, branch, self.qs, |tau, _| erf(self.phi(tau)) - limit)
    }

    fn saddle(&mut self, branch: Branch) -> Result<Complex64> {
        let cached = match branch {
            Branch::Down => self.saddle_down,
            Branch::Up => self.saddle_up,
        };
        if let Some(v) = cached {
            return Ok(v);
        }
        let v = self.remainder(self.contour.saddle, branch)?;
        match branch {
            Branch::Down => self.saddle_down = Some(v),
            Branch::Up => self.saddle_up = Some(v),
        }
        Ok(v)
    }

    fn at(&mut self, a: f64) -> Result<Complex64> {
        let (t, saddle) = (self.contour.t, self.contour.saddle);
        let (s0, st) = (self.x_src.signum(), self.x.signum());
        if a <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if a < saddle {
            // ∫₀ᵃ = s₀ a − ∫_{a → 0} (erf Φ − s₀)
            return Ok(Complex64::new(s0 * a, 0.0) - self.remainder(a, Branch::Down)?);
        }
        let to_saddle = Complex64::new(s0 * saddle, 0.0) - self.saddle(Branch::Down)?;
        // ∫_c^t = sₜ (t − c) + ∫_{c → t} (erf Φ − sₜ)
        let beyond = |c: f64, rem: Complex64| Complex64::new(st * (t - c), 0.0) + rem;
        let saddle_to_end = beyond(saddle, self.saddle(Branch::Up)?);
        if a >= t {
            return Ok(to_saddle + saddle_to_end);
        }
        let a_to_end = beyond(a, self.remainder(a, Branch::Up)?);
        Ok(to_saddle + saddle_to_end - a_to_end)
    }
}

/// Propagator for a piecewise-linear aperture from the `erf Φ` form.
pub fn k_general_route_b(q: &PropagatorQuery, a: &SampledAperture, qs: &QuadratureSettings) -> Result<Complex64> {
    qs.validate()?;
    let t = q.t;
    let chi_start = a.initial_level();
    let chi_end = a.value_at(t);

    let mut integral = Complex64::new(0.0, 0.0);
    let mut w = ErfAntiderivative::new(q, qs);
    for piece in a.pieces(t).into_iter().filter(|p| p.slope != 0.0) {
        integral += (w.at(piece.end)? - w.at(piece.start)?) * piece.slope;
    }

    let sgn = q.x_src.signum();
    let factor = Complex64::new(
        xi_unchecked(q.x, q.x_src) * (1.0 - chi_end) + 0.5 * (chi_start + chi_end),
        0.0,
    ) + integral * (0.5 * sgn);
    Ok(factor * q.free())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::erf_complex;
    use crate::quadrature::integrate;

    #[test]
    fn constant_sampled_aperture() {
        for v in [0.0, 0.3, 1.0] {
            let a = SampledAperture::new(vec![0.0, 1.0], vec![v, v]).unwrap();
            for &(x, xs) in &[(1.0, 2.0), (-1.0, 2.0)] {
                let query = PropagatorQuery::atomic(x, xs, 1.5).unwrap();
                let k = k_general_route_b(&query, &a, &QuadratureSettings::default()).unwrap();
                let xi = xi_unchecked(x, xs);
                let expected = query.free() * (xi * (1.0 - v) + v);
                assert!((k - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn antiderivative_matches_real_axis_quadrature_away_from_endpoints() {
        // On [0.3, 0.9] ⊂ (0, 1.2) the real-axis integrand is tame.
        let qs = QuadratureSettings::default();
        for &(x, xs) in &[(1.0, -1.5), (2.0, 0.7), (-0.5, -3.0)] {
            let query = PropagatorQuery::atomic(x, xs, 1.2).unwrap();
            let mut w = ErfAntiderivative::new(&query, &qs);
            let contour = w.at(0.9).unwrap() - w.at(0.3).unwrap();
            let pc = query.constants;
            let direct = integrate(
                |tau| erf_complex(crate::math::phi(x, xs, 1.2, tau, &pc).unwrap()).unwrap(),
                0.3,
                0.9,
                &qs,
            )
            .unwrap()
            .value;
            assert!((contour - direct).norm() < 1e-9, "({x}, {xs}): {contour} vs {direct}");
        }
    }
}
