use num_complex::Complex64;

use crate::aperture::StaircaseAperture;
use crate::math::{erf, free_propagator_unchecked, phi_prefactor, PhysicalConstants};

/// Closed-form staircase propagator prepared for a fixed aperture and time.
///
/// `K = Ξ [1 − χ(t)] K₀ + ½ (χ(0) + χ(t) + sgn(x') Σ Δ_n erf Φ(x, x'; t, t_n)) K₀`,
/// where the sum runs over jumps strictly before `t`.
#[derive(Debug, Clone)]
pub struct StaircaseKernel {
    t: f64,
    constants: PhysicalConstants,
    chi_start: f64,
    chi_end: f64,
    phi_prefactor: Complex64,
    /// `(Δ_n, √(t_n/(t − t_n)))`
    jumps: Vec<(f64, f64)>,
}

impl StaircaseKernel {
    pub fn new(a: &StaircaseAperture, t: f64, constants: PhysicalConstants) -> Self {
        let jumps = a
            .jumps()
            .into_iter()
            .filter(|j| j.time < t)
            .map(|j| (j.weight, (j.time / (t - j.time)).sqrt()))
            .collect();
        Self {
            t,
            constants,
            chi_start: a.initial_level(),
            chi_end: a.value_at(t),
            phi_prefactor: phi_prefactor(t, &constants),
            jumps,
        }
    }

    /// Number of `erf` terms per evaluation.
    pub fn terms(&self) -> usize {
        self.jumps.len()
    }

    /// Bracketed factor multiplying `K₀(x − x', t)`; `x` and `x'` must be nonzero.
    #[inline]
    pub fn amplitude_factor(&self, x: f64, x_src: f64) -> Complex64 {
        let same_side = if (x > 0.0) == (x_src > 0.0) { 1.0 } else { 0.0 };
        let mut sum = Complex64::new(0.0, 0.0);
        for &(weight, ratio) in &self.jumps {
            sum += erf(self.phi_prefactor * (x * ratio + x_src / ratio)) * weight;
        }
        let sum = if x_src > 0.0 { sum } else { -sum };
        Complex64::new(same_side * (1.0 - self.chi_end) + 0.5 * (self.chi_start + self.chi_end), 0.0) + 0.5 * sum
    }

    #[inline]
    pub fn eval(&self, x: f64, x_src: f64) -> Complex64 {
        self.amplitude_factor(x, x_src) * free_propagator_unchecked(x - x_src, self.t, &self.constants)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{k_staircase, xi, PropagatorQuery};

    #[test]
    fn open_shutter_is_free() {
        let a = StaircaseAperture::constant(1.0).unwrap();
        for &(x, xs, t) in &[(1.0, -1.0, 1.0), (3.0, 2.0, 0.2), (-7.0, 4.0, 5.0)] {
            let q = PropagatorQuery::atomic(x, xs, t).unwrap();
            assert!((k_staircase(&q, &a) - q.free()).norm() <= 1e-15 * q.free().norm());
        }
    }

    #[test]
    fn closed_shutter_blocks_transmission() {
        let a = StaircaseAperture::constant(0.0).unwrap();
        for &(x, xs, t) in &[(1.0, -1.0, 1.0), (3.0, 2.0, 0.2), (-7.0, -4.0, 5.0)] {
            let q = PropagatorQuery::atomic(x, xs, t).unwrap();
            assert_eq!(k_staircase(&q, &a), q.free() * xi(x, xs).unwrap());
        }
    }

    #[test]
    fn jumps_at_or_after_t_are_ignored() {
        let a = StaircaseAperture::moshinsky(2.0).unwrap();
        let k = StaircaseKernel::new(&a, 2.0, PhysicalConstants::default());
        assert_eq!(k.terms(), 0);
        // χ(t) = 1 by right-continuity, χ(0) = 0
        let f = k.amplitude_factor(1.0, -1.0);
        assert_eq!(f, Complex64::new(0.5, 0.0));
    }
}
