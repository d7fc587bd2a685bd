use std::f64::consts::{FRAC_1_PI, PI};

use catforge_core::interaction::{conditional_state, CouplingConfig};
use catforge_core::phase_space::{
    local_extrema, marginal, marginal_at, negativity, negativity_sweep, wigner, wigner_at,
    wigner_with, ExtremumKind, GridAxes, GridSpec, WignerMethod,
};
use catforge_core::{DensityMatrix, OpticalState, C64};
use proptest::prelude::*;

fn centered(half: f64, n: usize) -> GridSpec {
    GridSpec::Fixed(GridAxes::centered(0.0, 0.0, half, n).unwrap())
}

/// `W_1(x, y) = (2r² − 1) e^{−r²} / π`.
fn fock_one_wigner(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    (2.0 * r2 - 1.0) * (-r2).exp() * FRAC_1_PI
}

#[test]
fn fock_one_matches_analytic_function() {
    let w = wigner(&OpticalState::fock(1, 30), &centered(6.0, 121)).unwrap();
    for i in (0..121).step_by(7) {
        for j in (0..121).step_by(5) {
            let exact = fock_one_wigner(w.axes.x(i), w.axes.y(j));
            assert!((w.value(i, j) - exact).abs() < 1e-12);
        }
    }
}

#[test]
fn fock_one_negativity() {
    // Negative volume ∫_{r<1/√2} |W_1| = 2e^{−1/2} − 1; δ is twice that.
    let negative_volume = 2.0 * (-0.5f64).exp() - 1.0;
    let w = wigner(&OpticalState::fock(1, 30), &GridSpec::default()).unwrap();
    let delta = negativity(&w).unwrap();
    assert!((delta - 2.0 * negative_volume).abs() < 2e-3, "{delta}");
    let fine = wigner(&OpticalState::fock(1, 30), &centered(6.0, 801)).unwrap();
    assert!((negativity(&fine).unwrap() - delta).abs() < 1e-4);
}

#[test]
fn vacuum_and_single_photon_at_origin() {
    assert!((wigner_at(&OpticalState::vacuum(10), 0.0, 0.0).unwrap() - FRAC_1_PI).abs() < 1e-15);
    assert!((wigner_at(&OpticalState::fock(1, 10), 0.0, 0.0).unwrap() + FRAC_1_PI).abs() < 1e-15);
}

#[test]
fn coherent_input_is_positive_and_normalized() {
    let s = OpticalState::coherent(C64::new(50f64.sqrt(), 0.0), 256).unwrap();
    let w = wigner(&s, &GridSpec::default()).unwrap();
    assert!((w.integral() - 1.0).abs() < 2e-3);
    assert!(w.min() > -1e-10, "{}", w.min());
    assert!(negativity(&w).unwrap() < 2e-3);
    assert!(!w.exceeds_wigner_bound());
    assert!((w.axes.x0 + 6.0 - 10.0).abs() < 1e-9);
}

#[test]
fn weak_coupling_state_stays_positive() {
    let c = conditional_state(&CouplingConfig::new(0.01, 50.0), 0).unwrap();
    let w = wigner(&c.state, &GridSpec::default()).unwrap();
    assert!(negativity(&w).unwrap() < 2e-3);
}

#[test]
fn heralded_state_at_first_peak_is_negative() {
    let c = conditional_state(&CouplingConfig::new(0.17, 50.0), 0).unwrap();
    let w = wigner(&c.state, &GridSpec::default()).unwrap();
    assert!((w.integral() - 1.0).abs() < 2e-3);
    assert!(negativity(&w).unwrap() > 0.1);
    assert!(!w.exceeds_wigner_bound());
}

#[test]
fn refinement_changes_negativity_little() {
    let c = conditional_state(&CouplingConfig::new(0.17, 50.0), 0).unwrap();
    let coarse = wigner(
        &c.state,
        &GridSpec::Auto {
            points: 401,
            half_width: 6.0,
        },
    )
    .unwrap();
    let fine = wigner(
        &c.state,
        &GridSpec::Auto {
            points: 801,
            half_width: 6.0,
        },
    )
    .unwrap();
    let d = (negativity(&coarse).unwrap() - negativity(&fine).unwrap()).abs();
    assert!(d < 1e-3, "{d}");
}

#[test]
fn quarter_turn_rotates_the_grid() {
    let s = OpticalState::coherent(C64::new(1.5, 0.4), 60)
        .unwrap()
        .apply_creation(2)
        .unwrap()
        .normalize()
        .0;
    let spec = centered(8.0, 81);
    let w = wigner(&s, &spec).unwrap();
    let wr = wigner(&s.phase_rotate(PI / 2.0), &spec).unwrap();
    let n = 81;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            // W_rot(x, y) = W(y, −x)
            dev = dev.max((wr.value(i, j) - w.value(j, n - 1 - i)).abs());
        }
    }
    assert!(dev < 1e-8, "{dev}");
}

#[test]
fn marginal_consistency_with_grid() {
    let c = conditional_state(&CouplingConfig::new(0.5, 50.0), 0).unwrap();
    let w = wigner(&c.state, &GridSpec::default()).unwrap();
    let px = w.marginal_x();
    let coords: Vec<f64> = (0..w.axes.nx).map(|i| w.axes.x(i)).collect();
    let direct = marginal_at(&c.state, 0.0, &coords).unwrap();
    for (a, b) in px.iter().zip(&direct.density) {
        assert!((a - b).abs() < 2e-3);
    }
    let py = w.marginal_y();
    let coords_y: Vec<f64> = (0..w.axes.ny).map(|j| w.axes.y(j)).collect();
    let direct_y = marginal_at(&c.state, PI / 2.0, &coords_y).unwrap();
    for (a, b) in py.iter().zip(&direct_y.density) {
        assert!((a - b).abs() < 2e-3);
    }
}

#[test]
fn coherent_marginal_moments() {
    let s = OpticalState::coherent(C64::new(50f64.sqrt(), 0.0), 256).unwrap();
    let m = marginal(&s, 0.0, 801).unwrap();
    assert!((m.integral() - 1.0).abs() < 1e-3);
    let h = m.coords[1] - m.coords[0];
    let mean: f64 = m
        .coords
        .iter()
        .zip(&m.density)
        .map(|(x, p)| x * p)
        .sum::<f64>()
        * h;
    let var: f64 = m
        .coords
        .iter()
        .zip(&m.density)
        .map(|(x, p)| (x - mean).powi(2) * p)
        .sum::<f64>()
        * h;
    assert!((mean - 10.0).abs() < 1e-6);
    assert!((var - 0.5).abs() < 1e-6);
    assert!(m.density.iter().all(|&p| p >= 0.0));
}

#[test]
fn strong_heralded_odd_cat_has_separated_y_peaks() {
    let c = conditional_state(&CouplingConfig::new(0.95, 50.0), 1).unwrap();
    let m = marginal(&c.state, PI / 2.0, 801).unwrap();
    let peaks = m.peaks();
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    let (a, b) = (peaks[0], peaks[1]);
    assert!((a.position + b.position).abs() < 0.05);
    assert!((a.value - b.value).abs() < 0.02 * a.value);
    let centre = marginal_at(&c.state, PI / 2.0, &[0.5 * (a.position + b.position)]).unwrap();
    assert!(centre.density[0] < 0.05 * a.value, "{}", centre.density[0]);
}

#[test]
fn mixed_source_matches_pure_source() {
    let c = conditional_state(&CouplingConfig::new(0.17, 50.0), 0).unwrap();
    let rho = DensityMatrix::from_pure(&c.state);
    let spec = GridSpec::Auto {
        points: 61,
        half_width: 6.0,
    };
    let a = wigner(&c.state, &spec).unwrap();
    let b = wigner(&rho, &spec).unwrap();
    let dev = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn displaced_parity_reference_on_heralded_state() {
    let c = conditional_state(&CouplingConfig::new(0.17, 50.0), 0).unwrap();
    let spec = GridSpec::Auto {
        points: 13,
        half_width: 6.0,
    };
    let a = wigner_with(&c.state, &spec, WignerMethod::Weyl).unwrap();
    let b = wigner_with(&c.state, &spec, WignerMethod::DisplacedParity).unwrap();
    let dev = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-10, "{dev}");
}

#[test]
fn weak_coupling_sweep_is_flat_zero() {
    let template = CouplingConfig::new(0.0, 50.0);
    let gs: Vec<f64> = (0..=10).map(|i| i as f64 * 0.01).collect();
    let spec = GridSpec::Auto {
        points: 201,
        half_width: 6.0,
    };
    for p in negativity_sweep(&template, 0, &gs, &spec) {
        assert!(p.negativity.unwrap() < 2e-3, "g = {}", p.g);
    }
}

#[test]
fn first_negativity_peak_location() {
    let template = CouplingConfig::new(0.0, 50.0);
    let gs: Vec<f64> = (0..=16).map(|i| 0.13 + i as f64 * 0.005).collect();
    let spec = GridSpec::Auto {
        points: 201,
        half_width: 6.0,
    };
    let curve: Vec<(f64, f64)> = negativity_sweep(&template, 0, &gs, &spec)
        .into_iter()
        .map(|p| (p.g, p.negativity.unwrap()))
        .collect();
    let maxima: Vec<_> = local_extrema(&curve)
        .into_iter()
        .filter(|e| e.kind == ExtremumKind::Maximum)
        .collect();
    assert_eq!(maxima.len(), 1, "{maxima:?}");
    assert!((maxima[0].position - 0.171).abs() < 0.01, "{maxima:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rotation_covariance_pointwise(phi in -3.0f64..3.0, x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let s = OpticalState::coherent(C64::new(1.0, 0.5), 50)
            .unwrap()
            .apply_creation(1)
            .unwrap()
            .normalize()
            .0;
        let rotated = s.phase_rotate(phi);
        let (c, sn) = (phi.cos(), phi.sin());
        let w = wigner_at(&s, x, y).unwrap();
        let wr = wigner_at(&rotated, c * x - sn * y, sn * x + c * y).unwrap();
        prop_assert!((w - wr).abs() < 1e-10);
    }

    #[test]
    fn wigner_bounded_and_normalized(n in 0usize..12, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let s = OpticalState::coherent(C64::new(re, im), 60)
            .unwrap()
            .apply_creation(n)
            .unwrap()
            .normalize()
            .0;
        let w = wigner(&s, &GridSpec::Auto { points: 121, half_width: 8.0 }).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 2e-3);
        prop_assert!(!w.exceeds_wigner_bound());
        prop_assert!(negativity(&w).unwrap() >= 0.0);
    }
}
