use dit_core::{ApertureFunction, SampledAperture, StaircaseAperture};
use proptest::prelude::*;

#[test]
fn level_outside_unit_interval_is_rejected() {
    let err = StaircaseAperture::new(vec![0.5], vec![0.0, 1.3]).unwrap_err();
    assert!(err.to_string().contains("[0, 1]"), "{err}");
    assert!(SampledAperture::new(vec![0.0, 1.0], vec![0.0, -0.1]).is_err());
}

#[test]
fn malformed_shapes_are_rejected() {
    assert!(StaircaseAperture::new(vec![0.5], vec![0.0]).is_err());
    assert!(StaircaseAperture::new(vec![0.5, 0.4], vec![0.0, 1.0, 0.0]).is_err());
    assert!(SampledAperture::new(vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
    assert!(SampledAperture::new(vec![], vec![]).is_err());
}

#[test]
fn json_schema_round_trip() {
    let a: ApertureFunction =
        serde_json::from_str(r#"{"type":"staircase","breakpoints":[0.5,1.0],"levels":[0,0.5,1]}"#).unwrap();
    assert_eq!(a.value_at(0.7), 0.5);
    let back: ApertureFunction = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(a, back);
    let bad = serde_json::from_str::<ApertureFunction>(r#"{"type":"sampled","times":[0],"values":[1],"extra":1}"#);
    assert!(bad.is_err());
}

#[test]
fn grating_tiles_its_cell() {
    let g = StaircaseAperture::grating_from_slots(&[0.0, 1.0], 0.056, 27).unwrap();
    for k in 0..27 {
        let start = 2.0 * 0.056 * k as f64;
        assert_eq!(g.value_at(start + 0.01), 0.0);
        assert_eq!(g.value_at(start + 0.066), 1.0);
    }
    assert_eq!(g.final_level(), 1.0);
    assert!(g.open_after().unwrap() <= 3.1);
}

fn staircase() -> impl Strategy<Value = StaircaseAperture> {
    (1usize..8)
        .prop_flat_map(|n| (prop::collection::vec(0.05..1.0f64, n), prop::collection::vec(0.0..=1.0f64, n + 1)))
        .prop_map(|(gaps, levels)| {
            let breakpoints = gaps
                .iter()
                .scan(0.0, |acc, g| {
                    *acc += g;
                    Some(*acc)
                })
                .collect();
            StaircaseAperture::new(breakpoints, levels).unwrap()
        })
}

proptest! {
    #[test]
    fn values_stay_in_unit_interval(a in staircase(), tau in 0.0..10.0f64) {
        let v = a.value_at(tau);
        prop_assert!((0.0..=1.0).contains(&v));
        let s = a.to_sampled(0.01).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.value_at(tau)));
    }

    #[test]
    fn shifting_moves_the_clock(a in staircase(), offset in 0.0..3.0f64, tau in 0.0..5.0f64) {
        let s = a.shifted(offset).unwrap();
        let (lhs, rhs) = (s.value_at(tau), a.value_at(tau + offset));
        // away from breakpoints the two must agree exactly
        let near = a.breakpoints().iter().any(|b| (b - tau - offset).abs() < 1e-9);
        prop_assume!(!near);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ramped_staircase_agrees_off_the_ramps(a in staircase(), tau in 0.0..8.0f64) {
        let s = a.to_sampled(0.01).unwrap();
        let on_ramp = a.breakpoints().iter().any(|b| tau >= *b - 1e-12 && tau <= b + 0.01 + 1e-12);
        prop_assume!(!on_ramp);
        prop_assert!((s.value_at(tau) - a.value_at(tau)).abs() < 1e-12);
    }
}
