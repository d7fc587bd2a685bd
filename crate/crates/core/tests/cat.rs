use std::f64::consts::PI;

use catforge_core::cat::{
    cat_state, fidelity, fit_cat, fit_cat_with, metrological_power, quadrature_variance, CatFrame,
    CatParams, FitOptions,
};
use catforge_core::interaction::{conditional_state, CouplingConfig};
use catforge_core::{OpticalState, C64};
use proptest::prelude::*;

fn heralded(g: f64, k: i64) -> OpticalState {
    conditional_state(&CouplingConfig::new(g, 50.0), k)
        .unwrap()
        .state
}

#[test]
fn cat_mean_matches_superposition_moment() {
    // <a> = (2β_x − 2 Re(β E)) / (2 − 2 Re E), E = <β*|β> = e^{−|β|² + β²}.
    let p = CatParams::new(7.021, 0.020 * PI);
    let s = cat_state(p, 256).unwrap();
    let beta = p.beta();
    let e = (-beta.norm_sqr() + beta * beta).exp();
    let a = (2.0 * p.beta_x() - 2.0 * (beta * e).re) / (2.0 - 2.0 * e.re);
    let (x, y) = s.quadrature_means();
    assert!((x - std::f64::consts::SQRT_2 * a).abs() < 1e-6, "{x}");
    assert!(y.abs() < 1e-12);
}

#[test]
fn far_separated_cat_mean_tends_to_beta_x() {
    let p = CatParams::new(7.021, 0.3 * PI);
    let s = cat_state(p, 256).unwrap();
    let (x, _) = s.quadrature_means();
    assert!((x - std::f64::consts::SQRT_2 * p.beta_x()).abs() < 1e-6);
}

#[test]
fn self_fit_recovers_parameters() {
    let s = cat_state(CatParams::new(7.0, 0.05 * PI), 256).unwrap();
    let fit = fit_cat(&s).unwrap();
    assert!((fit.params.beta_mag - 7.0).abs() < 1e-3, "{fit:?}");
    assert!((fit.params.phi - 0.05 * PI).abs() < 1e-3, "{fit:?}");
    assert!(fit.fidelity > 1.0 - 1e-8);
    assert!(fit.cat_like);
}

#[test]
fn reference_fit_first_peak() {
    let s = heralded(0.17, 0);
    let reference = cat_state(CatParams::new(7.021, 0.020 * PI), 256).unwrap();
    assert!((fidelity(&reference, &s).unwrap() - 0.993).abs() < 3e-3);
    let fit = fit_cat(&s).unwrap();
    assert!((fit.fidelity - 0.993).abs() < 3e-3, "{fit:?}");
    assert!((fit.params.beta_mag - 7.021).abs() < 0.05, "{fit:?}");
    assert!((fit.params.phi / PI - 0.020).abs() < 0.002, "{fit:?}");
}

#[test]
fn reference_fit_photon_subtracted() {
    let fit = fit_cat(&heralded(0.275, 1)).unwrap();
    assert!((fit.fidelity - 0.994).abs() < 3e-3, "{fit:?}");
    assert!((fit.params.beta_mag - 6.951).abs() < 0.05, "{fit:?}");
    assert!((fit.params.phi / PI - 0.021).abs() < 0.002, "{fit:?}");
}

#[test]
fn reference_fit_strong_coupling() {
    let fit = fit_cat(&heralded(2.0, 0)).unwrap();
    assert!((fit.fidelity - 0.98).abs() < 0.01, "{fit:?}");
    assert!((fit.params.beta_mag - 7.061).abs() < 0.05, "{fit:?}");
    assert!((fit.params.phi / PI - 0.085).abs() < 0.003, "{fit:?}");
}

#[test]
fn subtraction_beats_no_subtraction_at_strong_coupling() {
    let odd = fit_cat(&heralded(0.95, 1)).unwrap();
    let even = fit_cat(&heralded(0.95, 0)).unwrap();
    assert!((odd.fidelity - 0.996).abs() < 3e-3, "{odd:?}");
    assert!(even.fidelity < odd.fidelity);
}

#[test]
fn non_cat_like_states_are_flagged() {
    let fit = fit_cat(&OpticalState::fock(3, 40)).unwrap();
    assert!(!fit.cat_like);
}

#[test]
fn peaks_are_cat_like_and_metrology_grows() {
    let mut powers = Vec::new();
    for g in [0.171, 0.391, 0.612, 0.834] {
        let s = heralded(g, 0);
        let fit = fit_cat(&s).unwrap();
        assert!(fit.fidelity >= 0.99, "g = {g}: {fit:?}");
        powers.push(metrological_power(&s).power);
    }
    assert!(powers.windows(2).all(|w| w[1] > w[0]), "{powers:?}");
}

#[test]
fn valleys_are_amplitude_squeezed() {
    for g in [0.28, 0.50, 0.72, 0.94] {
        let v = quadrature_variance(&heralded(g, 0), 0.0);
        assert!(v < 0.5, "g = {g}: {v}");
    }
}

#[test]
fn cat_metrology_matches_brute_force_variance() {
    let s = cat_state(CatParams::new(7.021, 0.020 * PI), 256).unwrap();
    let report = metrological_power(&s);
    let brute = (0..3600)
        .map(|i| quadrature_variance(&s, i as f64 * PI / 3600.0))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((report.fisher - 4.0 * brute).abs() < 1e-6);
    assert!((report.power - (4.0 * brute - 2.0) / 4.0).abs() < 1e-6);
    assert!(report.power > 0.0);
    assert!((report.var_x - quadrature_variance(&s, 0.0)).abs() < 1e-15);
}

#[test]
fn fixed_rotation_frame_follows_rotated_target() {
    let s = heralded(0.17, 0);
    let phi0 = 0.7;
    let plain = fit_cat(&s).unwrap();
    let opts = FitOptions {
        frame: CatFrame::Rotated(phi0),
        ..FitOptions::default()
    };
    let rotated = fit_cat_with(&s.phase_rotate(phi0), &opts).unwrap();
    assert!((plain.params.beta_mag - rotated.params.beta_mag).abs() < 1e-3);
    assert!((plain.fidelity - rotated.fidelity).abs() < 1e-6);
    let fitted = rotated.state(256).unwrap();
    assert!((fidelity(&fitted, &s.phase_rotate(phi0)).unwrap() - rotated.fidelity).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fit_is_rotation_invariant_in_centroid_frame(phi0 in -3.0f64..3.0) {
        let s = heralded(0.275, 1);
        let opts = FitOptions { frame: CatFrame::Centroid, ..FitOptions::default() };
        let a = fit_cat_with(&s, &opts).unwrap();
        let b = fit_cat_with(&s.phase_rotate(phi0), &opts).unwrap();
        prop_assert!((a.params.beta_mag - b.params.beta_mag).abs() < 1e-3);
        prop_assert!((a.fidelity - b.fidelity).abs() < 1e-6);
    }

    #[test]
    fn metrological_power_is_rotation_invariant(g in 0.05f64..1.0, phi in -3.0f64..3.0) {
        let s = heralded(g, 0);
        let a = metrological_power(&s).power;
        let b = metrological_power(&s.phase_rotate(phi)).power;
        prop_assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn coherent_states_have_no_metrological_power(re in -6.0f64..6.0, im in -6.0f64..6.0) {
        let s = OpticalState::coherent(C64::new(re, im), 200).unwrap();
        let r = metrological_power(&s);
        prop_assert_eq!(r.power, 0.0);
        prop_assert_eq!(r.fisher, 2.0);
    }

    #[test]
    fn fidelity_is_bounded(b1 in 0.5f64..5.0, p1 in 0.05f64..3.0, b2 in 0.5f64..5.0, p2 in 0.05f64..3.0) {
        let a = cat_state(CatParams::new(b1, p1), 80).unwrap();
        let c = cat_state(CatParams::new(b2, p2), 80).unwrap();
        let f = fidelity(&a, &c).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }
}
