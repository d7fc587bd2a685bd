//! Photon loss of the optical mode and ensemble averages over fluctuating
//! coupling strength.
//!
//! Times are in μs and rates in μs⁻¹ (so `kappa = 1.0` is 1 MHz). The loss
//! generator is `κ(2aρa† − a†aρ − ρa†a)`, whose survival probability per
//! photon is `η = e^{−2κt}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::cat::{fidelity, fit_cat, CatFit};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, OpticalState};
use crate::interaction::{conditional_state, CouplingConfig};
use crate::par::map_indices;
use crate::phase_space::{negativity, wigner, GridSpec};
use crate::special::{gauss_hermite, ln_binomial};

/// Default loss rate, 1 MHz.
pub const DEFAULT_KAPPA: f64 = 1.0;
/// `δ` below which the negativity counts as extinguished.
pub const EXTINCTION_THRESHOLD: f64 = 2e-3;
pub const DEFAULT_SAMPLES: usize = 21;
pub const MIN_SAMPLES: usize = 9;

/// Per-photon survival probability after time `t`.
pub fn survival(kappa: f64, t: f64) -> f64 {
    (-2.0 * kappa * t).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    kappa: f64,
    times: Vec<f64>,
}

impl LossSpec {
    pub fn new(kappa: f64, times: Vec<f64>) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(
                "kappa",
                format!("must be positive, got {kappa}"),
            ));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::invalid(
                "times",
                format!("must be non-negative, got {t}"),
            ));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("times", "must be sorted ascending"));
        }
        Ok(LossSpec { kappa, times })
    }

    /// `steps + 1` equally spaced times on `[0, t_max]`.
    pub fn uniform(kappa: f64, t_max: f64, steps: usize) -> Result<Self> {
        let steps = steps.max(1);
        let times = (0..=steps)
            .map(|i| t_max * i as f64 / steps as f64)
            .collect();
        LossSpec::new(kappa, times)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// Pure-loss channel with survival `eta`:
/// `ρ'_{mn} = Σ_l w_l(m) w_l(n) ρ_{m+l, n+l}`,
/// `w_l(m)² = C(m+l, l) (1−η)^l η^m`.
pub fn loss_channel(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(
            "eta",
            format!("must lie in [0, 1], got {eta}"),
        ));
    }
    let dim = rho.dim();
    if eta == 1.0 {
        return Ok(rho.clone());
    }
    let src = rho.matrix();
    if eta == 0.0 {
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        out[(0, 0)] = C64::new(rho.trace(), 0.0);
        return Ok(DensityMatrix::from_matrix_unchecked(out));
    }
    let ln_eta = eta.ln();
    let ln_loss = (-eta).ln_1p();
    // w[l * dim + m] = w_l(m)
    let mut w = vec![0.0; dim * dim];
    for l in 0..dim {
        for m in 0..dim - l {
            let ln_sq = ln_binomial(m + l, l) + l as f64 * ln_loss + m as f64 * ln_eta;
            w[l * dim + m] = (0.5 * ln_sq).exp();
        }
    }
    let rows = map_indices(dim, |m| {
        (0..=m)
            .map(|n| {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..dim - m {
                    acc += src[(m + l, n + l)] * (w[l * dim + m] * w[l * dim + n]);
                }
                acc
            })
            .collect::<Vec<C64>>()
    });
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for (m, row) in rows.into_iter().enumerate() {
        for (n, v) in row.into_iter().enumerate() {
            out[(m, n)] = v;
            out[(n, m)] = v.conj();
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Snapshots of a lossy evolution from a pure initial state.
#[derive(Debug, Clone)]
pub struct LossEvolution {
    pub kappa: f64,
    pub initial: OpticalState,
    pub snapshots: Vec<(f64, DensityMatrix)>,
}

pub fn loss_evolve(state: &OpticalState, spec: &LossSpec) -> Result<LossEvolution> {
    if !state.is_normalized() {
        return Err(Error::invalid("state", "must be normalized"));
    }
    state.check_converged()?;
    let rho0 = DensityMatrix::from_pure(state);
    let snapshots = map_indices(spec.times.len(), |i| {
        let t = spec.times[i];
        loss_channel(&rho0, survival(spec.kappa, t)).map(|rho| (t, rho))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(LossEvolution {
        kappa: spec.kappa,
        initial: state.clone(),
        snapshots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossMetrics {
    pub t: f64,
    pub negativity: f64,
    /// `<φ_cat|ρ(t)|φ_cat>` with the cat fitted at `t = 0`.
    pub fidelity: f64,
}

/// `δ(t)` and the fidelity with the initial best-fit cat, per snapshot.
pub fn loss_metrics(evolution: &LossEvolution, grid: &GridSpec) -> Result<Vec<LossMetrics>> {
    let fit = fit_cat(&evolution.initial)?;
    loss_metrics_against(evolution, &fit, grid)
}

pub fn loss_metrics_against(
    evolution: &LossEvolution,
    fit: &CatFit,
    grid: &GridSpec,
) -> Result<Vec<LossMetrics>> {
    let cat = fit.state(evolution.initial.n_max())?;
    map_indices(evolution.snapshots.len(), |i| {
        let (t, rho) = &evolution.snapshots[i];
        Ok(LossMetrics {
            t: *t,
            negativity: negativity(&wigner(rho, grid)?)?,
            fidelity: rho.expectation(&cat)?,
        })
    })
    .into_iter()
    .collect()
}

/// Scan-then-bisect settings for [`extinction_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionSearch {
    pub threshold: f64,
    pub step: f64,
    pub t_max: f64,
    pub tolerance: f64,
}

impl Default for ExtinctionSearch {
    fn default() -> Self {
        ExtinctionSearch {
            threshold: EXTINCTION_THRESHOLD,
            step: 0.05,
            t_max: 5.0,
            tolerance: 1e-3,
        }
    }
}

/// First time at which `δ(t)` drops below the threshold.
pub fn extinction_time(
    state: &OpticalState,
    kappa: f64,
    grid: &GridSpec,
    search: &ExtinctionSearch,
) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::invalid(
            "kappa",
            format!("must be positive, got {kappa}"),
        ));
    }
    if !(search.step > 0.0 && search.tolerance > 0.0) {
        return Err(Error::invalid(
            "step",
            "step and tolerance must be positive",
        ));
    }
    state.check_converged()?;
    let rho0 = DensityMatrix::from_pure(&state.clone().normalize().0);
    let delta = |t: f64| -> Result<f64> {
        let rho = loss_channel(&rho0, survival(kappa, t))?;
        negativity(&wigner(&rho, grid)?)
    };
    if delta(0.0)? < search.threshold {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = loop {
        let t = lo + search.step;
        if t > search.t_max {
            return Err(Error::invalid(
                "t_max",
                format!(
                    "negativity still above {} at t = {}",
                    search.threshold, search.t_max
                ),
            ));
        }
        if delta(t)? < search.threshold {
            break t;
        }
        lo = t;
    };
    while hi - lo > search.tolerance {
        let mid = 0.5 * (lo + hi);
        if delta(mid)? < search.threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gaussian spread of the coupling magnitude, truncated at `|g| ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationSpec {
    g0: f64,
    delta_g: f64,
    samples: usize,
}

impl FluctuationSpec {
    pub fn new(g0: f64, delta_g: f64, samples: usize) -> Result<Self> {
        if !(g0 >= 0.0 && g0.is_finite()) {
            return Err(Error::invalid(
                "g0",
                format!("must be non-negative, got {g0}"),
            ));
        }
        if !(delta_g >= 0.0 && delta_g.is_finite()) {
            return Err(Error::invalid(
                "delta_g",
                format!("must be non-negative, got {delta_g}"),
            ));
        }
        if samples < MIN_SAMPLES {
            return Err(Error::invalid(
                "samples",
                format!("need at least {MIN_SAMPLES} quadrature nodes, got {samples}"),
            ));
        }
        Ok(FluctuationSpec {
            g0,
            delta_g,
            samples,
        })
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn delta_g(&self) -> f64 {
        self.delta_g
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// False when the spread reaches past zero coupling, where the
    /// truncation of the distribution becomes significant.
    pub fn is_narrow(&self) -> bool {
        self.delta_g < self.g0
    }

    /// Quadrature nodes `(g_i, w_i)` with weights summing to one.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        if self.delta_g == 0.0 {
            return vec![(self.g0, 1.0)];
        }
        let (x, w) = gauss_hermite(self.samples);
        let scale = std::f64::consts::SQRT_2 * self.delta_g;
        let kept: Vec<(f64, f64)> = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| (self.g0 + scale * xi, *wi))
            .filter(|(g, _)| *g >= 0.0)
            .collect();
        let total: f64 = kept.iter().map(|(_, w)| w).sum();
        kept.into_iter().map(|(g, w)| (g, w / total)).collect()
    }
}

/// How the ensemble is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AverageMode {
    /// Weighted mean of the per-node `δ` and `F`.
    #[default]
    Metrics,
    /// `δ` and `F` of the weighted mixture of node states.
    DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeOutcome {
    pub g: f64,
    pub weight: f64,
    /// `(δ, F)` of the node's pure state; `None` when skipped for truncation.
    pub metrics: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub negativity: f64,
    /// Fidelity with the cat fitted at the nominal coupling.
    pub fidelity: f64,
    pub reference: CatFit,
    pub nodes: Vec<NodeOutcome>,
}

/// Averages `δ` and the fidelity with the nominal best-fit cat over the
/// coupling distribution. Nodes failing on truncation are dropped and the
/// remaining weights renormalized.
pub fn fluctuation_average(
    spec: &FluctuationSpec,
    physics: &CouplingConfig,
    k: i64,
    mode: AverageMode,
    grid: &GridSpec,
) -> Result<EnsembleAverage> {
    let nominal = conditional_state(&physics.with_g(C64::new(spec.g0, 0.0)), k)?;
    let reference = fit_cat(&nominal.state)?;
    let cat = reference.state(nominal.state.n_max())?;
    let nodes = spec.nodes();

    let states: Vec<Result<OpticalState>> = map_indices(nodes.len(), |i| {
        conditional_state(&physics.with_g(C64::new(nodes[i].0, 0.0)), k).map(|c| c.state)
    });
    let mut first_err = None;
    let mut kept = Vec::new();
    for (i, s) in states.into_iter().enumerate() {
        match s {
            Ok(s) => kept.push((i, s)),
            Err(e) if e.is_truncation() => {
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::AllNodesFailed {
            first: Box::new(first_err.unwrap_or_else(|| Error::invalid("samples", "no nodes"))),
        });
    }
    let total: f64 = kept.iter().map(|(i, _)| nodes[*i].1).sum();

    let per_node: Vec<(f64, f64)> = match mode {
        AverageMode::Metrics => map_indices(kept.len(), |r| {
            let s = &kept[r].1;
            Ok((negativity(&wigner(s, grid)?)?, fidelity(s, &cat)?))
        })
        .into_iter()
        .collect::<Result<_>>()?,
        AverageMode::DensityMatrix => Vec::new(),
    };

    let (negativity_mean, fidelity_mean) = match mode {
        AverageMode::Metrics => kept
            .iter()
            .zip(&per_node)
            .fold((0.0, 0.0), |acc, ((i, _), m)| {
                let w = nodes[*i].1 / total;
                (acc.0 + w * m.0, acc.1 + w * m.1)
            }),
        AverageMode::DensityMatrix => {
            let mix: Vec<(f64, &OpticalState)> =
                kept.iter().map(|(i, s)| (nodes[*i].1, s)).collect();
            let rho = DensityMatrix::mixture(&mix)?;
            (negativity(&wigner(&rho, grid)?)?, rho.expectation(&cat)?)
        }
    };

    let mut metrics = per_node.into_iter();
    let mut kept_iter = kept.iter().map(|(i, _)| *i).peekable();
    let outcomes = nodes
        .iter()
        .enumerate()
        .map(|(i, (g, w))| {
            let used = kept_iter.peek() == Some(&i);
            if used {
                kept_iter.next();
            }
            NodeOutcome {
                g: *g,
                weight: if used { w / total } else { 0.0 },
                metrics: if used { metrics.next() } else { None },
            }
        })
        .collect();

    Ok(EnsembleAverage {
        negativity: negativity_mean,
        fidelity: fidelity_mean,
        reference,
        nodes: outcomes,
    })
}
