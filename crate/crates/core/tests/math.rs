use std::f64::consts::PI;

use dit_core::math::{branch_sqrt_inverse_it, erf_complex, free_propagator, phi};
use dit_core::{Complex64, PhysicalConstants};
use proptest::prelude::*;

// Reference values from an arbitrary-precision evaluation (30 digits).
const ERF_TABLE: &[(f64, f64, f64, f64)] = &[
    (0.5, 0.0, 0.52049987781304654, 0.0),
    (0.0, 1.0, 0.0, 1.6504257587975429),
    (1.0, 1.0, 1.3161512816979476, 0.19045346923783469),
    (2.0, -1.0, 1.0036063427256518, 0.011259006028815025),
    (-3.0, 0.5, -1.0000280653614764, -2.6284897222588231e-7),
    (0.1, 4.0, 896390.58842697168, 918683.22696144983),
    (4.0, 4.0, 0.97854923307608193, 0.097339690630831865),
    (6.0, -6.0, 1.0576342401356786, 0.0331391147411565),
    (-0.2, -7.0, -5.4057423666072845e19, 1.3905450123940868e20),
    (0.001, 0.001, 0.0011283799193478393, 0.0011283784148422832),
    (3.0, 3.0, 0.86782649757545114, -0.012152181790312257),
];

#[test]
fn erf_matches_reference_table() {
    for &(re, im, ere, eim) in ERF_TABLE {
        let got = erf_complex(Complex64::new(re, im)).unwrap();
        let want = Complex64::new(ere, eim);
        let rel = (got - want).norm() / want.norm();
        assert!(rel < 1e-13, "erf({re}+{im}i) = {got}, want {want} (rel {rel:e})");
    }
}

#[test]
fn erf_rejects_non_finite() {
    assert!(erf_complex(Complex64::new(f64::NAN, 0.0)).is_err());
    assert!(erf_complex(Complex64::new(0.0, f64::INFINITY)).is_err());
}

#[test]
fn erf_real_axis_agrees_with_series() {
    // Maclaurin series, summed directly; fine for |x| ≤ 1.
    for &x in &[-1.0, -0.3, 0.0, 0.25, 0.9] {
        let mut term = x;
        let mut sum = x;
        for n in 1..60 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        let want = 2.0 / PI.sqrt() * sum;
        let got = erf_complex(Complex64::new(x, 0.0)).unwrap();
        assert!((got.re - want).abs() < 1e-15 && got.im == 0.0, "{x}: {got} vs {want}");
    }
}

#[test]
fn branch_is_principal() {
    let s = branch_sqrt_inverse_it(2.0, 8.0).unwrap();
    // √(4/i) = 2 e^{-iπ/4}
    assert!((s - Complex64::from_polar(2.0, -PI / 4.0)).norm() < 1e-15);
    assert!(s.re > 0.0 && s.im < 0.0);
    assert!(branch_sqrt_inverse_it(0.0, 1.0).is_err());
    assert!(branch_sqrt_inverse_it(1.0, -1.0).is_err());
}

fn free_by_hand(z: f64, t: f64, m: f64, hbar: f64) -> Complex64 {
    let amp = (m / (2.0 * PI * hbar * t)).sqrt();
    Complex64::from_polar(amp, m * z * z / (2.0 * hbar * t) - PI / 4.0)
}

#[test]
fn free_propagator_rejects_bad_time() {
    let pc = PhysicalConstants::default();
    assert!(free_propagator(1.0, 0.0, &pc).is_err());
    assert!(free_propagator(1.0, -1.0, &pc).is_err());
    assert!(free_propagator(f64::NAN, 1.0, &pc).is_err());
}

proptest! {
    #[test]
    fn erf_is_odd(re in -6.0..6.0f64, im in -6.0..6.0f64) {
        let z = Complex64::new(re, im);
        let a = erf_complex(z).unwrap();
        let b = erf_complex(-z).unwrap();
        prop_assert!((a + b).norm() <= 1e-14 * a.norm().max(1.0));
    }

    #[test]
    fn erf_commutes_with_conjugation(re in -6.0..6.0f64, im in -6.0..6.0f64) {
        let z = Complex64::new(re, im);
        let a = erf_complex(z.conj()).unwrap();
        let b = erf_complex(z).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0));
    }

    #[test]
    fn free_propagator_matches_closed_form(
        z in -30.0..30.0f64,
        t in 0.05..10.0f64,
        m in 0.2..5.0f64,
        hbar in 0.2..5.0f64,
    ) {
        let pc = PhysicalConstants::new(m, hbar).unwrap();
        let got = free_propagator(z, t, &pc).unwrap();
        let want = free_by_hand(z, t, m, hbar);
        // the phase m z²/2ħt can reach ~10⁴, so allow for its rounding
        let phase = m * z * z / (2.0 * hbar * t);
        prop_assert!((got - want).norm() <= want.norm() * 1e-15 * (10.0 + phase));
    }

    #[test]
    fn phi_exchange_symmetry(
        x in -20.0..20.0f64,
        xs in -20.0..20.0f64,
        t in 0.1..5.0f64,
        frac in 0.01..0.99f64,
    ) {
        let pc = PhysicalConstants::default();
        let tau = frac * t;
        let a = phi(x, xs, t, tau, &pc).unwrap();
        let b = phi(xs, x, t, t - tau, &pc).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn phi_is_homogeneous(
        x in -10.0..10.0f64,
        xs in -10.0..10.0f64,
        lambda in -4.0..4.0f64,
        frac in 0.05..0.95f64,
    ) {
        let pc = PhysicalConstants::default();
        let a = phi(lambda * x, lambda * xs, 2.0, 2.0 * frac, &pc).unwrap();
        let b = phi(x, xs, 2.0, 2.0 * frac, &pc).unwrap() * lambda;
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
