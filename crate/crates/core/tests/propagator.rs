use std::f64::consts::PI;

use dit_core::propagator::{
    composition_defect, evaluate, k_general_route_a, k_general_route_b, k_staircase, CompositionGrid, PreparedKernel,
};
use dit_core::{ApertureFunction, Complex64, PropagatorQuery, QuadratureSettings, Route, SampledAperture, StaircaseAperture};
use proptest::prelude::*;

fn free_by_hand(z: f64, t: f64) -> Complex64 {
    Complex64::from_polar((2.0 * PI * t).sqrt().recip(), z * z / (2.0 * t) - PI / 4.0)
}

fn same_side(x: f64, xs: f64) -> bool {
    (x > 0.0) == (xs > 0.0)
}

fn off_barrier() -> impl Strategy<Value = f64> {
    prop_oneof![-20.0..-0.1f64, 0.1..20.0f64]
}

fn grating_a() -> StaircaseAperture {
    StaircaseAperture::grating_from_slots(&[0.0, 1.0], 0.056, 27).unwrap()
}

fn grating_c() -> StaircaseAperture {
    StaircaseAperture::grating_from_slots(&[0.0, 0.5, 1.0], 0.056, 18).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn known_point_values() {
    let open = StaircaseAperture::constant(1.0).unwrap();
    let closed = StaircaseAperture::constant(0.0).unwrap();
    let q = PropagatorQuery::atomic(1.0, -1.0, 1.0).unwrap();
    assert!(rel(k_staircase(&q, &open), free_by_hand(2.0, 1.0)) < 1e-14);
    assert_eq!(k_staircase(&q, &closed), Complex64::new(0.0, 0.0));
}

#[test]
fn moshinsky_point_against_hand_formula() {
    // χ = Θ(τ − t₁): K = ½ [1 + sgn(x') erf Φ(t₁)] K₀ for opposite sides.
    let (x, xs, t, t1): (f64, f64, f64, f64) = (5.0, -10.0, 3.0, 0.5);
    let a = StaircaseAperture::moshinsky(t1).unwrap();
    let q = PropagatorQuery::atomic(x, xs, t).unwrap();
    let r = (t1 / (t - t1)).sqrt();
    let phi = Complex64::from_polar((1.0 / (2.0 * t)).sqrt(), -PI / 4.0) * (x * r + xs / r);
    let erf = dit_core::math::erf_complex(phi).unwrap();
    let want = (Complex64::new(1.0, 0.0) + erf * xs.signum()) * 0.5 * free_by_hand(x - xs, t);
    assert!(rel(k_staircase(&q, &a), want) < 1e-13);
    let qs = QuadratureSettings::default();
    assert!(rel(k_general_route_a(&q, &a.into(), &qs).unwrap(), want) < 1e-7);
}

#[test]
fn staircase_agrees_with_contour_quadrature_on_gratings() {
    let qs = QuadratureSettings::default();
    let pts = [(5.0, -10.0, 3.0), (-2.0, -7.5, 3.0), (12.0, -1.0, 1.7), (-0.4, 3.0, 2.2), (8.0, 6.0, 3.0)];
    for g in [grating_a(), grating_c()] {
        let af: ApertureFunction = g.clone().into();
        for &(x, xs, t) in &pts {
            let q = PropagatorQuery::atomic(x, xs, t).unwrap();
            let k = k_staircase(&q, &g);
            let r = k_general_route_a(&q, &af, &qs).unwrap();
            assert!(rel(r, k) < 1e-6, "({x}, {xs}, {t}): {k} vs {r}");
        }
    }
}

#[test]
fn routes_agree_on_ramps() {
    let qs = QuadratureSettings::default();
    let a = SampledAperture::new(vec![0.0, 0.4, 1.1, 2.0], vec![0.0, 0.2, 0.9, 1.0]).unwrap();
    let af: ApertureFunction = a.clone().into();
    for &(x, xs, t) in &[(3.0, -2.0, 2.5), (-1.0, -4.0, 1.5), (0.7, 6.0, 0.9), (-9.0, 2.0, 4.0)] {
        let q = PropagatorQuery::atomic(x, xs, t).unwrap();
        let b = k_general_route_b(&q, &a, &qs).unwrap();
        let r = k_general_route_a(&q, &af, &qs).unwrap();
        assert!(rel(b, r) < 1e-7, "({x}, {xs}, {t}): {b} vs {r}");
    }
}

#[test]
fn steep_ramps_converge_to_the_staircase() {
    let qs = QuadratureSettings::default();
    let stair = StaircaseAperture::new(vec![0.5, 1.2], vec![0.0, 1.0, 0.3]).unwrap();
    let q = PropagatorQuery::atomic(4.0, -3.0, 2.0).unwrap();
    let exact = k_staircase(&q, &stair);
    let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&w| rel(k_general_route_b(&q, &stair.to_sampled(w).unwrap(), &qs).unwrap(), exact))
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-2, "{errs:?}");
}

#[test]
fn preferred_routes() {
    let qs = QuadratureSettings::default();
    let q = PropagatorQuery::atomic(1.0, -1.0, 1.0).unwrap();
    let (_, r) = evaluate(&q, &StaircaseAperture::constant(1.0).unwrap().into(), &qs).unwrap();
    assert_eq!(r, Route::StaircaseClosedForm);
    let s = SampledAperture::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
    let (_, r) = evaluate(&q, &s.into(), &qs).unwrap();
    assert_eq!(r, Route::ErfQuadrature);
}

#[test]
fn composition_holds_once_the_shutter_is_off() {
    let qs = QuadratureSettings::default();
    let a: ApertureFunction = StaircaseAperture::moshinsky(0.5).unwrap().into();
    let q = PropagatorQuery::atomic(5.0, -10.0, 3.0).unwrap();
    let d = composition_defect(&q, &a, 1.0, &qs, &CompositionGrid::default()).unwrap();
    assert!(d.free_outer);
    assert!(d.defect < 1e-5 * d.direct.norm().max(1e-3), "{d:?}");
}

#[test]
fn composition_fails_for_a_closed_shutter() {
    let qs = QuadratureSettings::default();
    let a: ApertureFunction = StaircaseAperture::constant(0.0).unwrap().into();
    let q = PropagatorQuery::atomic(2.0, 1.0, 3.0).unwrap();
    let d = composition_defect(&q, &a, 1.0, &qs, &CompositionGrid::default()).unwrap();
    assert!(d.defect > 1e-2, "{d:?}");
    assert!(composition_defect(&q, &a, 3.0, &qs, &CompositionGrid::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn open_and_closed_reductions(x in off_barrier(), xs in off_barrier(), t in 0.1..5.0f64) {
        let q = PropagatorQuery::atomic(x, xs, t).unwrap();
        let k0 = free_by_hand(x - xs, t);
        let open = k_staircase(&q, &StaircaseAperture::constant(1.0).unwrap());
        let phase = (x - xs).powi(2) / (2.0 * t);
        prop_assert!(rel(open, k0) < 1e-15 * (10.0 + phase));
        let closed = k_staircase(&q, &StaircaseAperture::constant(0.0).unwrap());
        if same_side(x, xs) {
            prop_assert_eq!(closed, q.free());
        } else {
            prop_assert_eq!(closed, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn mirror_symmetry(x in off_barrier(), xs in off_barrier(), t in 0.1..3.0f64) {
        // The shutter sits at the origin, so reflecting both points changes nothing.
        let g = grating_c();
        let a = k_staircase(&PropagatorQuery::atomic(x, xs, t).unwrap(), &g);
        let b = k_staircase(&PropagatorQuery::atomic(-x, -xs, t).unwrap(), &g);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-3));
    }

    #[test]
    fn reciprocity_with_time_reversed_aperture(
        x in 0.1..15.0f64,
        xs in -15.0..-0.1f64,
        t in 0.3..3.0f64,
        b1 in 0.05..0.45f64,
        b2 in 0.55..0.95f64,
        levels in prop::collection::vec(0.0..=1.0f64, 3),
    ) {
        // Across the shutter, K(x, x'; t)[χ] = K(x', x; t)[χ(t − ·)].
        let fwd = StaircaseAperture::new(vec![b1 * t, b2 * t], levels.clone()).unwrap();
        let rev = StaircaseAperture::new(
            vec![t - b2 * t, t - b1 * t],
            levels.iter().rev().copied().collect(),
        ).unwrap();
        let a = k_staircase(&PropagatorQuery::atomic(x, xs, t).unwrap(), &fwd);
        let b = k_staircase(&PropagatorQuery::atomic(xs, x, t).unwrap(), &rev);
        prop_assert!((a - b).norm() <= 1e-12 * free_by_hand(x - xs, t).norm());
    }

    #[test]
    fn prepared_kernel_matches_direct_evaluation(x in off_barrier(), xs in off_barrier(), t in 0.2..3.0f64) {
        let g = grating_a();
        let k = PreparedKernel::new(&g.clone().into(), t, Default::default(), &QuadratureSettings::default());
        let q = PropagatorQuery::atomic(x, xs, t).unwrap();
        prop_assert_eq!(k.eval(x, xs).unwrap(), k_staircase(&q, &g));
    }
}
