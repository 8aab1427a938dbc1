use dit_core::evolution::{
    coherent_state, evolve, free_coherent_amplitude, husimi, observables, EvolutionSettings, PhaseSpaceAxes,
    SourceRule, SpaceGrid, Wavefunction,
};
use dit_core::{ApertureFunction, Complex64, PhysicalConstants, StaircaseAperture};

fn open() -> ApertureFunction {
    StaircaseAperture::constant(1.0).unwrap().into()
}

fn source() -> SpaceGrid {
    SpaceGrid::with_spacing(-20.0, 0.0, 0.02).unwrap()
}

#[test]
fn open_shutter_reproduces_free_gaussian() {
    let pc = PhysicalConstants::default();
    let psi0 = coherent_state(-10.0, 2.0, &source()).unwrap();
    let out = SpaceGrid::new(-12.0, 6.0, 91).unwrap();
    for rule in [SourceRule::Trapezoid, SourceRule::Simpson] {
        let settings = EvolutionSettings { rule, ..Default::default() };
        let (psi, _) = evolve(&psi0, &open(), 2.0, &out, &pc, &settings).unwrap();
        for (x, z) in psi.points().into_iter().zip(&psi.amplitudes) {
            let want = free_coherent_amplitude(-10.0, 2.0, 2.0, x, &pc);
            assert!((z - want).norm() < 1e-6, "{rule:?} at {x}: {z} vs {want}");
        }
    }
}

#[test]
fn evolution_is_linear() {
    let pc = PhysicalConstants::default();
    let a: ApertureFunction = StaircaseAperture::grating_from_slots(&[0.0, 0.5, 1.0], 0.056, 18).unwrap().into();
    let g = source();
    let p1 = coherent_state(-10.0, 5.0, &g).unwrap();
    let p2 = coherent_state(-8.0, 3.0, &g).unwrap();
    let (alpha, beta) = (Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4));
    let mix: Vec<Complex64> = p1.amplitudes.iter().zip(&p2.amplitudes).map(|(a, b)| alpha * a + beta * b).collect();
    let mix = Wavefunction::new(g, mix, 0.0).unwrap();
    let out = SpaceGrid::new(-15.0, 15.0, 61).unwrap();
    let s = EvolutionSettings::default();
    let e1 = evolve(&p1, &a, 3.0, &out, &pc, &s).unwrap().0;
    let e2 = evolve(&p2, &a, 3.0, &out, &pc, &s).unwrap().0;
    let em = evolve(&mix, &a, 3.0, &out, &pc, &s).unwrap().0;
    for k in 0..out.n_points {
        let want = alpha * e1.amplitudes[k] + beta * e2.amplitudes[k];
        assert!((em.amplitudes[k] - want).norm() < 1e-12);
    }
}

#[test]
fn closed_shutter_transmits_nothing() {
    let pc = PhysicalConstants::default();
    let a: ApertureFunction = StaircaseAperture::constant(0.0).unwrap().into();
    let psi0 = coherent_state(-10.0, 5.0, &source()).unwrap();
    let out = SpaceGrid::with_spacing(-30.0, 30.0, 0.1).unwrap();
    let (psi, _) = evolve(&psi0, &a, 3.0, &out, &pc, &Default::default()).unwrap();
    let obs = observables(&psi, psi0.norm_sqr()).unwrap();
    assert_eq!(obs.transmitted, 0.0);
    assert!(obs.absorbed > 0.5, "{obs:?}");
}

#[test]
fn half_transparent_grating_absorbs_part_of_the_packet() {
    let pc = PhysicalConstants::default();
    let a: ApertureFunction = StaircaseAperture::grating_from_slots(&[0.0, 0.5, 1.0], 0.056, 18).unwrap().into();
    let psi0 = coherent_state(-10.0, 5.0, &source()).unwrap();
    let out = SpaceGrid::with_spacing(-40.0, 50.0, 0.05).unwrap();
    let (psi, _) = evolve(&psi0, &a, 3.0, &out, &pc, &Default::default()).unwrap();
    let obs = observables(&psi, psi0.norm_sqr()).unwrap();
    assert!(obs.absorbed > 0.0 && obs.absorbed < 1.0, "{obs:?}");
    assert!(obs.transmitted > 0.0 && obs.reflected > 0.0, "{obs:?}");
    assert!((obs.transmitted + obs.reflected + obs.absorbed - 1.0).abs() < 1e-12);
}

#[test]
fn husimi_of_a_coherent_state() {
    let g = SpaceGrid::with_spacing(-15.0, 15.0, 0.02).unwrap();
    let psi = coherent_state(1.0, -2.0, &g).unwrap();
    let axes = PhaseSpaceAxes { q_min: -2.0, q_max: 4.0, q_count: 13, p_min: -5.0, p_max: 1.0, p_count: 13 };
    let h = husimi(&psi, &axes).unwrap();
    let norm = psi.norm_sqr();
    for i in 0..axes.q_count {
        for j in 0..axes.p_count {
            let (dq, dp) = (axes.q(i) - 1.0, axes.p(j) + 2.0);
            let want = (-(dq * dq + dp * dp) / 2.0).exp();
            let v = h.value(i, j);
            assert!((v - want).abs() < 1e-10, "({dq}, {dp}): {v} vs {want}");
            assert!(v >= 0.0 && v <= norm + 1e-12);
        }
    }
    let (peak, i, j) = h.max();
    assert!((peak - 1.0).abs() < 1e-10 && axes.q(i) == 1.0 && axes.p(j) == -2.0);
}

#[test]
fn wide_packets_are_refused() {
    let pc = PhysicalConstants::default();
    let psi0 = coherent_state(-2.0, 0.0, &SpaceGrid::with_spacing(-6.0, 0.0, 0.02).unwrap()).unwrap();
    let out = SpaceGrid::new(-1.0, 1.0, 4).unwrap();
    assert!(evolve(&psi0, &open(), 1.0, &out, &pc, &Default::default()).is_err());
}
