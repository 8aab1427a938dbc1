//! Quadrature of the Huygens–Fresnel form
//! `K = Ξ K₀(x−x', t) + ∫₀ᵗ u K₀(x, t−τ) χ(τ) K₀(−x', τ) dτ`.
//!
//! On the real axis the integrand behaves like `τ^{-3/2} e^{iA/τ}` near
//! `τ = 0` and like `(t−τ)^{-3/2} e^{iB/(t−τ)}` near `τ = t`, so it cannot be
//! integrated there directly. On each piece where χ is linear the integrand
//! is analytic, so the piece is replaced by steepest-descent contours of the
//! phase `φ(τ) = A/τ + B/(t−τ)`. Along such a contour `φ = φ(a) + i s²`, the
//! exponential becomes `e^{iφ(a)} e^{-s²}` and the remaining integrand is
//! smooth. The level sets of `φ` are roots of a quadratic in `τ`, so the
//! contours are explicit.
//!
//! From a real point `a` below the stationary point `τ*` the contour runs
//! through the lower half plane into `τ = 0`; above `τ*` it runs through the
//! upper half plane into `τ = t`. With `W(a) = ∫₀ᵃ F dτ` expressed through
//! these contours, every piece contributes `W(end) − W(start)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::aperture::ApertureFunction;
use crate::error::Result;
use crate::propagator::{xi_unchecked, PropagatorQuery};
use crate::quadrature::{integrate, QuadratureSettings};

/// Upper limit of the contour parameter; `e^{-S²}` is below 1e-21.
const S_MAX: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Branch {
    /// Lower half plane, ends at τ = 0.
    Down,
    /// Upper half plane, ends at τ = t.
    Up,
}

pub(super) struct Contour {
    pub(super) t: f64,
    x: f64,
    x_src: f64,
    /// m x'²/2ħ
    a_coef: f64,
    /// m x²/2ħ
    b_coef: f64,
    /// −i m/(2πħ) · (−sgn(x')/2)
    prefactor: Complex64,
    pub(super) saddle: f64,
    /// t − τ*
    rest: f64,
    /// `A/τ*² = B/(t−τ*)²`
    kappa: f64,
}

impl Contour {
    pub(super) fn new(q: &PropagatorQuery) -> Self {
        let k = q.constants.m_over_hbar();
        let sgn = q.x_src.signum();
        let (ax, axs) = (q.x.abs(), q.x_src.abs());
        let span = ax + axs;
        Self {
            t: q.t,
            x: q.x,
            x_src: q.x_src,
            a_coef: 0.5 * k * q.x_src * q.x_src,
            b_coef: 0.5 * k * q.x * q.x,
            prefactor: Complex64::new(0.0, -k / (2.0 * PI)) * (-0.5 * sgn),
            saddle: q.t * axs / span,
            rest: q.t * ax / span,
            kappa: 0.5 * k * span * span / (q.t * q.t),
        }
    }

    pub(super) fn phase(&self, tau: f64) -> f64 {
        self.a_coef / tau + self.b_coef / (self.t - tau)
    }

    /// `φ(τ* + δ) − φ(τ*) = κ t δ² / ((τ* + δ)(t − τ* − δ))`, free of cancellation.
    fn phase_excess(&self, delta: f64) -> f64 {
        self.kappa * self.t * delta * delta / ((self.saddle + delta) * (self.rest - delta))
    }

    /// `φ'(τ* + δ) = κ t δ (2 τ*(t−τ*) + (t − 2τ*) δ) / ((τ* + δ)² (t − τ* − δ)²)`
    fn phase_derivative(&self, delta: Complex64) -> Complex64 {
        let (u, v) = (self.saddle, self.rest);
        let left = delta + u;
        let right = -delta + v;
        delta * self.kappa * self.t * (delta * (v - u) + 2.0 * u * v) / (left * left * right * right)
    }

    /// Integrand without the exponential: `u · τ^{-1/2} (t−τ)^{-1/2} · (m/2πiħ)`.
    fn amplitude(&self, tau: Complex64) -> Complex64 {
        let r = self.t - tau;
        let bracket = self.x / r - self.x_src / tau;
        self.prefactor * bracket / (tau.sqrt() * r.sqrt())
    }

    /// Offset `δ = τ − τ*` of the point where `φ(τ) − φ(τ*) = excess + i p`.
    fn offset(&self, excess: f64, p: f64, branch: Branch) -> Complex64 {
        // κ t δ² = c (τ* + δ)(t − τ* − δ) with c = excess + i p, i.e.
        // (κ t + c) δ² − c (t − 2τ*) δ − c τ*(t − τ*) = 0
        let (u, v) = (self.saddle, self.rest);
        let c = Complex64::new(excess, p);
        let alpha = c + self.kappa * self.t;
        let beta = -c * (v - u);
        let gamma = -c * (u * v);
        let disc = beta * beta - alpha * gamma * 4.0;
        let mut root = disc.sqrt();
        if (beta.conj() * root).re < 0.0 {
            root = -root;
        }
        let qq = -(beta + root) * 0.5;
        let (r1, r2) = if qq == Complex64::new(0.0, 0.0) {
            (qq, qq)
        } else {
            (qq / alpha, gamma / qq)
        };
        let (lower, upper) = if r1.im <= r2.im { (r1, r2) } else { (r2, r1) };
        match branch {
            Branch::Down => lower,
            Branch::Up => upper,
        }
    }

    /// Point on the contour through the real point `start` at `Im φ = p`.
    #[cfg(test)]
    fn point(&self, start: f64, p: f64, branch: Branch) -> Complex64 {
        let delta = start - self.saddle;
        self.offset(self.phase_excess(delta), p, branch) + self.saddle
    }

    /// `∫ g(τ, p) dτ` from the real point `start` along `branch`, where
    /// `p = Im φ(τ)` on the contour.
    pub(super) fn path<G: Fn(Complex64, f64) -> Complex64>(
        &self,
        start: f64,
        branch: Branch,
        qs: &QuadratureSettings,
        g: G,
    ) -> Result<Complex64> {
        let excess = self.phase_excess(start - self.saddle);
        let integrand = |s: f64| {
            let p = s * s;
            let delta = self.offset(excess, p, branch);
            // s = 0 is never sampled, so φ' ≠ 0 even for paths leaving τ*.
            let dtau_ds = Complex64::new(0.0, 2.0 * s) / self.phase_derivative(delta);
            g(delta + self.saddle, p) * dtau_ds
        };
        Ok(integrate(integrand, 0.0, S_MAX, qs)?.value)
    }

    /// `∫ τ^moment F(τ) dτ` from the real point `start` along `branch`.
    fn path_integral(&self, start: f64, branch: Branch, moment: u32, qs: &QuadratureSettings) -> Result<Complex64> {
        let v = self.path(start, branch, qs, |tau, p| {
            let weight = if moment == 0 { Complex64::new(1.0, 0.0) } else { tau.powu(moment) };
            self.amplitude(tau) * weight * (-p).exp()
        })?;
        Ok(v * Complex64::cis(self.phase(start)))
    }
}

/// Lazily evaluated `W(a) = ∫₀ᵃ τ^moment F(τ) dτ`.
struct Antiderivative<'a> {
    contour: &'a Contour,
    moment: u32,
    qs: &'a QuadratureSettings,
    saddle_down: Option<Complex64>,
    saddle_up: Option<Complex64>,
}

impl<'a> Antiderivative<'a> {
    fn new(contour: &'a Contour, moment: u32, qs: &'a QuadratureSettings) -> Self {
        Self { contour, moment, qs, saddle_down: None, saddle_up: None }
    }

    fn saddle(&mut self, branch: Branch) -> Result<Complex64> {
        let slot = match branch {
            Branch::Down => &mut self.saddle_down,
            Branch::Up => &mut self.saddle_up,
        };
        if let Some(v) = slot {
            return Ok(*v);
        }
        let v = self.contour.path_integral(self.contour.saddle, branch, self.moment, self.qs)?;
        *slot = Some(v);
        Ok(v)
    }

    fn at(&mut self, a: f64) -> Result<Complex64> {
        let c = self.contour;
        if a <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if a < c.saddle {
            return Ok(-c.path_integral(a, Branch::Down, self.moment, self.qs)?);
        }
        let to_saddle = -self.saddle(Branch::Down)?;
        if a == c.saddle {
            return Ok(to_saddle);
        }
        let across = to_saddle + self.saddle(Branch::Up)?;
        if a >= c.t {
            return Ok(across);
        }
        Ok(across - c.path_integral(a, Branch::Up, self.moment, self.qs)?)
    }
}

/// Propagator from the Huygens–Fresnel integral, for any aperture.
pub fn k_general_route_a(q: &PropagatorQuery, a: &ApertureFunction, qs: &QuadratureSettings) -> Result<Complex64> {
    qs.validate()?;
    let free = q.free();
    let mut value = free * xi_unchecked(q.x, q.x_src);

    let contour = Contour::new(q);
    let mut w0 = Antiderivative::new(&contour, 0, qs);
    let mut w1 = Antiderivative::new(&contour, 1, qs);
    for piece in a.pieces(q.t) {
        if piece.offset != 0.0 {
            value += (w0.at(piece.end)? - w0.at(piece.start)?) * piece.offset;
        }
        if piece.slope != 0.0 {
            value += (w1.at(piece.end)? - w1.at(piece.start)?) * piece.slope;
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aperture::StaircaseAperture;

    fn q(x: f64, xs: f64, t: f64) -> PropagatorQuery {
        PropagatorQuery::atomic(x, xs, t).unwrap()
    }

    #[test]
    fn contour_stays_on_level_set() {
        let query = q(2.0, -3.0, 1.5);
        let c = Contour::new(&query);
        for &start in &[0.1, c.saddle, 1.2] {
            let level = c.phase(start);
            for &branch in &[Branch::Down, Branch::Up] {
                for &p in &[1e-6, 0.3, 5.0, 40.0] {
                    let tau = c.point(start, p, branch);
                    let phi = c.a_coef / tau + c.b_coef / (c.t - tau);
                    assert!((phi - Complex64::new(level, p)).norm() < 1e-9 * (1.0 + level), "{phi} vs {level}+{p}i");
                    match branch {
                        Branch::Down => assert!(tau.im < 0.0),
                        Branch::Up => assert!(tau.im > 0.0),
                    }
                }
            }
        }
    }

    #[test]
    fn closed_shutter_contributes_nothing() {
        let a = ApertureFunction::Staircase(StaircaseAperture::constant(0.0).unwrap());
        let query = q(1.0, 2.0, 1.0);
        let v = k_general_route_a(&query, &a, &QuadratureSettings::default()).unwrap();
        assert_eq!(v, query.free());
        let query = q(-1.0, 2.0, 1.0);
        let v = k_general_route_a(&query, &a, &QuadratureSettings::default()).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn open_shutter_reproduces_free_propagator() {
        let a = ApertureFunction::Staircase(StaircaseAperture::constant(1.0).unwrap());
        for &(x, xs, t) in &[(1.0, -1.0, 1.0), (5.0, -10.0, 3.0), (2.0, 3.0, 0.7), (-20.0, 19.0, 0.1), (-0.2, -4.0, 5.0)] {
            let query = q(x, xs, t);
            let v = k_general_route_a(&query, &a, &QuadratureSettings::default()).unwrap();
            let rel = (v - query.free()).norm() / query.free().norm();
            assert!(rel < 1e-8, "({x}, {xs}, {t}): rel {rel:e}");
        }
    }
}
