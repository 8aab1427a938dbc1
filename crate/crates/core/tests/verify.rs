use dit_core::verify::{check_delta_limit, check_discontinuity, check_tdse, run_suite, tolerances, TestBump};
use dit_core::{PhysicalConstants, PropagatorQuery, QuadratureSettings, StaircaseAperture};

#[test]
fn default_suite_passes_and_is_deterministic() {
    let a = run_suite(7, None).unwrap();
    let b = run_suite(7, None).unwrap();
    assert_eq!(a, b);
    for r in &a {
        assert!(r.passed, "{r:?}");
    }
    let names: Vec<&str> = a.iter().map(|r| r.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for prefix in ["tdse/", "discontinuity/", "delta-limit/", "phi-identity/", "moshinsky/"] {
        assert!(names.iter().any(|n| n.starts_with(prefix)), "no {prefix} check");
    }
}

#[test]
fn unattainable_tolerance_fails() {
    let reports = run_suite(7, Some(1e-20)).unwrap();
    assert!(reports.iter().any(|r| !r.passed));
}

#[test]
fn closed_shutter_gap_and_open_continuity() {
    let pc = PhysicalConstants::default();
    let qs = QuadratureSettings::default();
    for level in [0.0, 1.0] {
        let a = StaircaseAperture::constant(level).unwrap().into();
        let r = check_discontinuity(-3.0, 1.5, &a, 1e-3, tolerances::DISCONTINUITY, &pc, &qs).unwrap();
        assert!(r.passed, "{r:?}");
    }
    let m = StaircaseAperture::moshinsky(0.5).unwrap().into();
    assert!(check_discontinuity(-3.0, 0.5, &m, 1e-3, 1e-6, &pc, &qs).is_err());
}

#[test]
fn stencil_preconditions() {
    let a = StaircaseAperture::constant(1.0).unwrap().into();
    let qs = QuadratureSettings::default();
    let q = PropagatorQuery::atomic(2e-4, 1.0, 1.0).unwrap();
    assert!(check_tdse(&q, &a, 1e-4, 1e-4, &qs).is_err());
    let q = PropagatorQuery::atomic(2.0, 1.0, 1.0).unwrap();
    let r = check_tdse(&q, &a, 1e-4, 1e-4, &qs).unwrap();
    assert!(r.passed, "{r:?}");
    let straddling = TestBump { center: 0.5, width: 0.5 };
    let times = [1e-2, 5e-3];
    assert!(check_delta_limit(&straddling, 0.5, &times, &a, 1e-2, &PhysicalConstants::default()).is_err());
}
