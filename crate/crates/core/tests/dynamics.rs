use catforge_core::cat::fit_cat;
use catforge_core::dynamics::{
    extinction_time, fluctuation_average, loss_channel, loss_evolve, loss_metrics, survival,
    AverageMode, ExtinctionSearch, FluctuationSpec, LossSpec,
};
use catforge_core::interaction::{conditional_state, CouplingConfig};
use catforge_core::phase_space::{negativity, wigner, GridSpec};
use catforge_core::{DensityMatrix, OpticalState, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

const SWEEP_GRID: GridSpec = GridSpec::Auto {
    points: 201,
    half_width: 6.0,
};

fn heralded(g: f64, k: i64) -> OpticalState {
    conditional_state(&CouplingConfig::new(g, 50.0), k)
        .unwrap()
        .state
}

/// `κ(2aρa† − a†aρ − ρa†a)` on a dense matrix.
fn lindblad(rho: &DMatrix<C64>, kappa: f64) -> DMatrix<C64> {
    let d = rho.nrows();
    let a = DMatrix::<C64>::from_fn(d, d, |m, n| {
        if n == m + 1 {
            C64::new((n as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let ad = a.adjoint();
    let num = &ad * &a;
    (&a * rho * &ad * C64::new(2.0, 0.0) - &num * rho - rho * &num) * C64::new(kappa, 0.0)
}

fn rk4(rho: &DMatrix<C64>, kappa: f64, t: f64, steps: usize) -> DMatrix<C64> {
    let h = C64::new(t / steps as f64, 0.0);
    let half = h * 0.5;
    let mut r = rho.clone();
    for _ in 0..steps {
        let k1 = lindblad(&r, kappa);
        let k2 = lindblad(&(&r + &k1 * half), kappa);
        let k3 = lindblad(&(&r + &k2 * half), kappa);
        let k4 = lindblad(&(&r + &k3 * h), kappa);
        r += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (h / 6.0);
    }
    r
}

fn three_photon_state() -> OpticalState {
    OpticalState::from_amplitudes(vec![
        C64::new(0.2, 0.1),
        C64::new(0.0, -0.5),
        C64::new(0.4, 0.3),
        C64::new(0.6, 0.0),
    ])
    .normalize()
    .0
}

#[test]
fn kraus_map_matches_master_equation() {
    let psi = three_photon_state();
    let rho = DensityMatrix::from_pure(&psi);
    let kappa = 1.0;
    let t = 0.25;
    let kraus = loss_channel(&rho, survival(kappa, t)).unwrap();
    let integrated = DensityMatrix::from_matrix(rk4(rho.matrix(), kappa, t, 4000)).unwrap();
    let d = kraus.trace_distance(&integrated).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn master_equation_agreement_in_a_larger_space() {
    let psi = OpticalState::coherent(C64::new(1.2, -0.7), 30)
        .unwrap()
        .apply_creation(2)
        .unwrap()
        .normalize()
        .0;
    let rho = DensityMatrix::from_pure(&psi);
    let kraus = loss_channel(&rho, survival(0.8, 0.4)).unwrap();
    let integrated = DensityMatrix::from_matrix(rk4(rho.matrix(), 0.8, 0.4, 2000)).unwrap();
    assert!(kraus.trace_distance(&integrated).unwrap() < 1e-6);
}

#[test]
fn initial_snapshot_is_the_input() {
    let s = heralded(0.17, 0);
    let ev = loss_evolve(&s, &LossSpec::new(1.0, vec![0.0, 0.1]).unwrap()).unwrap();
    let (t0, rho0) = &ev.snapshots[0];
    assert_eq!(*t0, 0.0);
    assert!((rho0.expectation(&s).unwrap() - 1.0).abs() < 1e-12);
    let pure = DensityMatrix::from_pure(&s);
    let dev = (rho0.matrix() - pure.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(dev < 1e-15);
}

#[test]
fn coherent_states_stay_coherent() {
    let alpha = C64::new(50f64.sqrt(), 0.0);
    let s = OpticalState::coherent(alpha, 160).unwrap();
    let spec = LossSpec::new(1.0, vec![0.05, 0.3, 1.0]).unwrap();
    for (t, rho) in loss_evolve(&s, &spec).unwrap().snapshots {
        let expected = OpticalState::coherent(alpha * (-spec.kappa() * t).exp(), 160).unwrap();
        let f = rho.expectation(&expected).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "t = {t}: {f}");
    }
}

#[test]
fn long_times_reach_vacuum() {
    let s = heralded(0.17, 0);
    let ev = loss_evolve(&s, &LossSpec::new(1.0, vec![20.0]).unwrap()).unwrap();
    let rho = &ev.snapshots[0].1;
    assert!((rho.element(0, 0).re - 1.0).abs() < 1e-10);
}

#[test]
fn heralded_evolution_keeps_density_invariants() {
    let s = heralded(0.17, 0);
    let spec = LossSpec::uniform(1.0, 0.5, 5).unwrap();
    for (t, rho) in loss_evolve(&s, &spec).unwrap().snapshots {
        assert!((rho.trace() - 1.0).abs() < 1e-10, "t = {t}");
        assert!(rho.hermiticity_error() < 1e-14);
        assert!(rho.min_eigenvalue() > -1e-10, "t = {t}");
    }
}

#[test]
fn metrics_at_zero_time_match_pure_state() {
    let s = heralded(0.17, 0);
    let ev = loss_evolve(&s, &LossSpec::new(1.0, vec![0.0]).unwrap()).unwrap();
    let m = loss_metrics(&ev, &SWEEP_GRID).unwrap()[0];
    let pure = negativity(&wigner(&s, &SWEEP_GRID).unwrap()).unwrap();
    assert!((m.negativity - pure).abs() < 1e-6);
    assert!((m.fidelity - fit_cat(&s).unwrap().fidelity).abs() < 1e-10);
}

#[test]
fn negativity_decreases_under_loss() {
    for g in [0.17, 2.0] {
        let ev = loss_evolve(&heralded(g, 0), &LossSpec::uniform(1.0, 0.5, 20).unwrap()).unwrap();
        let m = loss_metrics(&ev, &SWEEP_GRID).unwrap();
        for w in m.windows(2) {
            assert!(w[1].negativity <= w[0].negativity + 1e-9, "g = {g}: {w:?}");
        }
    }
}

/// The cat-fidelity half of the monotonicity claim does not hold: once the
/// negativity is gone the vacuum-like part of the decayed state gains
/// overlap with the initial cat (|g| = 0.17 rises from 0.10 to 0.19
/// between 0.15 and 0.25 μs).
#[test]
#[ignore = "cat fidelity is not monotone under loss for the heralded states"]
fn cat_fidelity_decreases_under_loss() {
    for g in [0.17, 2.0] {
        let ev = loss_evolve(&heralded(g, 0), &LossSpec::uniform(1.0, 0.5, 20).unwrap()).unwrap();
        let m = loss_metrics(&ev, &SWEEP_GRID).unwrap();
        for w in m.windows(2) {
            assert!(w[1].fidelity <= w[0].fidelity + 1e-9, "g = {g}: {w:?}");
        }
    }
}

#[test]
fn cat_fidelity_leaves_its_initial_value() {
    let ev = loss_evolve(
        &heralded(0.17, 0),
        &LossSpec::uniform(1.0, 0.5, 10).unwrap(),
    )
    .unwrap();
    let m = loss_metrics(&ev, &SWEEP_GRID).unwrap();
    assert!(m.iter().skip(1).all(|p| p.fidelity < m[0].fidelity));
    assert!(m.last().unwrap().fidelity < 0.01);
}

#[test]
fn extinction_times_are_comparable() {
    let search = ExtinctionSearch::default();
    let weak = extinction_time(&heralded(0.17, 0), 1.0, &SWEEP_GRID, &search).unwrap();
    let strong = extinction_time(&heralded(2.0, 0), 1.0, &SWEEP_GRID, &search).unwrap();
    for t in [weak, strong] {
        assert!((0.15..=0.6).contains(&t), "{t}");
    }
    assert!(
        (weak - strong).abs() / weak.max(strong) < 0.3,
        "{weak} {strong}"
    );
}

#[test]
fn extinction_time_scales_inversely_with_kappa() {
    let s = heralded(0.17, 0);
    let search = ExtinctionSearch {
        tolerance: 1e-4,
        ..ExtinctionSearch::default()
    };
    let t1 = extinction_time(&s, 1.0, &SWEEP_GRID, &search).unwrap();
    let t2 = extinction_time(&s, 2.0, &SWEEP_GRID, &search).unwrap();
    assert!((t1 - 2.0 * t2).abs() < 3e-4, "{t1} {t2}");
}

#[test]
fn zero_spread_equals_single_point() {
    let phys = CouplingConfig::new(0.17, 50.0);
    let spec = FluctuationSpec::new(0.17, 0.0, 21).unwrap();
    let s = heralded(0.17, 0);
    let fit = fit_cat(&s).unwrap();
    let delta = negativity(&wigner(&s, &SWEEP_GRID).unwrap()).unwrap();
    for mode in [AverageMode::Metrics, AverageMode::DensityMatrix] {
        let avg = fluctuation_average(&spec, &phys, 0, mode, &SWEEP_GRID).unwrap();
        assert!((avg.negativity - delta).abs() < 1e-10, "{mode:?}");
        assert!((avg.fidelity - fit.fidelity).abs() < 1e-10, "{mode:?}");
    }
}

#[test]
fn fidelity_is_linear_in_the_ensemble() {
    let phys = CouplingConfig::new(0.17, 50.0);
    let spec = FluctuationSpec::new(0.17, 0.01, 21).unwrap();
    let a = fluctuation_average(&spec, &phys, 0, AverageMode::Metrics, &SWEEP_GRID).unwrap();
    let b = fluctuation_average(&spec, &phys, 0, AverageMode::DensityMatrix, &SWEEP_GRID).unwrap();
    assert!((a.fidelity - b.fidelity).abs() < 1e-12);
    assert!(b.negativity < a.negativity);
    assert!(a.nodes.iter().all(|n| n.metrics.is_some()));
}

#[test]
fn narrow_spread_keeps_the_cat() {
    let phys = CouplingConfig::new(0.17, 50.0);
    for (g0, dg) in [(0.17, 0.01), (2.0, 0.05)] {
        let spec = FluctuationSpec::new(g0, dg, 21).unwrap();
        let avg = fluctuation_average(&spec, &phys, 0, AverageMode::Metrics, &SWEEP_GRID).unwrap();
        assert!(avg.negativity > 0.0);
        assert!(avg.fidelity > 0.5, "{g0} {dg}: {}", avg.fidelity);
    }
}

fn halving_change(g0: f64, dg: f64) -> (f64, f64) {
    let phys = CouplingConfig::new(g0, 50.0);
    let full = FluctuationSpec::new(g0, dg, 21).unwrap();
    let half = FluctuationSpec::new(g0, dg, 10).unwrap();
    let a = fluctuation_average(&full, &phys, 0, AverageMode::Metrics, &SWEEP_GRID).unwrap();
    let b = fluctuation_average(&half, &phys, 0, AverageMode::Metrics, &SWEEP_GRID).unwrap();
    (
        (a.negativity - b.negativity).abs(),
        (a.fidelity - b.fidelity).abs(),
    )
}

#[test]
fn halving_nodes_changes_little_for_narrow_spreads() {
    for (g0, dg) in [(0.17, 0.005), (2.0, 0.05)] {
        let (d, f) = halving_change(g0, dg);
        assert!(d < 1e-3 && f < 1e-3, "{g0} {dg}: {d:e} {f:e}");
    }
}

/// Ten nodes under-resolve the oscillating `δ(|g|)` once the spread
/// approaches a quarter of its period: at `Δg = 0.01` the change is
/// 1.5e-3 in `δ` and 2.3e-3 in `F`, while 21 and 41 nodes agree to 1e-4.
#[test]
#[ignore = "ten-node quadrature is not converged at Δg = 0.01"]
fn halving_nodes_changes_little_at_first_peak_spread() {
    let (d, f) = halving_change(0.17, 0.01);
    assert!(d < 1e-3 && f < 1e-3, "{d:e} {f:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn loss_is_a_semigroup(e1 in 0.05f64..1.0, e2 in 0.05f64..1.0, re in -2.0f64..2.0, n in 0usize..4) {
        let psi = OpticalState::coherent(C64::new(re, 0.6), 40)
            .unwrap()
            .apply_creation(n)
            .unwrap()
            .normalize()
            .0;
        let rho = DensityMatrix::from_pure(&psi);
        let two_step = loss_channel(&loss_channel(&rho, e1).unwrap(), e2).unwrap();
        let one_step = loss_channel(&rho, e1 * e2).unwrap();
        prop_assert!(two_step.trace_distance(&one_step).unwrap() < 1e-9);
    }

    #[test]
    fn loss_preserves_trace_and_positivity(eta in 0.0f64..=1.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let psi = OpticalState::coherent(C64::new(re, im), 60)
            .unwrap()
            .apply_creation(2)
            .unwrap()
            .normalize()
            .0;
        let out = loss_channel(&DensityMatrix::from_pure(&psi), eta).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue() > -1e-10);
        prop_assert!(out.hermiticity_error() == 0.0);
    }
}
