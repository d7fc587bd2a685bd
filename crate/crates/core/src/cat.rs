//! Displaced odd cat states `N_c(|β> − |β*>)`, cat fits, quadrature
//! variances and metrological power.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::OpticalState;
use crate::par::map_indices;
use crate::special::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatParams {
    pub beta_mag: f64,
    /// Phase of `β`, in `(0, π)`.
    pub phi: f64,
    /// Fidelity reached against the fitted state, when known.
    pub fidelity: Option<f64>,
}

impl CatParams {
    pub fn new(beta_mag: f64, phi: f64) -> Self {
        CatParams {
            beta_mag,
            phi,
            fidelity: None,
        }
    }

    pub fn beta(&self) -> C64 {
        C64::from_polar(self.beta_mag, self.phi)
    }

    pub fn beta_x(&self) -> f64 {
        self.beta_mag * self.phi.cos()
    }

    pub fn beta_y(&self) -> f64 {
        self.beta_mag * self.phi.sin()
    }

    /// `N_c² = 1 / (2 − 2 e^{−2β_y²} cos(|β|² sin 2φ))`, with the
    /// difference formed without cancellation for small `β_y`.
    pub fn normalizer_sq(&self) -> Result<f64> {
        self.check()?;
        let by2 = self.beta_y().powi(2);
        let v = self.beta_mag.powi(2) * (2.0 * self.phi).sin();
        let one_minus = -(-2.0 * by2).exp_m1() * v.cos() + 2.0 * (0.5 * v).sin().powi(2);
        Ok(1.0 / (2.0 * one_minus))
    }

    fn check(&self) -> Result<()> {
        let s = self.phi.sin();
        let degenerate =
            !(self.phi > 0.0 && self.phi < PI) || s.abs() < 1e-15 || self.beta_mag <= 0.0;
        if degenerate || !self.beta_mag.is_finite() {
            return Err(Error::DegenerateCat {
                beta_mag: self.beta_mag,
                phi: self.phi,
            });
        }
        Ok(())
    }
}

/// Unnormalized real amplitudes `e^{−|β|²/2} |β|^n sin(nφ)/√n!` (from
/// `(β^n − β*^n)/(2i)`).
fn cat_amplitudes(beta_mag: f64, phi: f64, n_max: usize) -> Vec<f64> {
    let ln_b = beta_mag.ln();
    let half = -0.5 * beta_mag * beta_mag;
    (0..=n_max)
        .map(|n| {
            let turns = n as f64 * phi / PI;
            let s = (n as f64 * phi).sin();
            // sin(nφ) vanishes exactly when nφ is a multiple of π.
            if (turns - turns.round()).abs() < 1e-12 {
                0.0
            } else {
                s * (half + n as f64 * ln_b - 0.5 * ln_factorial(n)).exp()
            }
        })
        .collect()
}

/// Normalized displaced odd cat, global factor `2iN_c` dropped.
pub fn cat_state(params: CatParams, n_max: usize) -> Result<OpticalState> {
    params.check()?;
    let amps: Vec<C64> = cat_amplitudes(params.beta_mag, params.phi, n_max)
        .into_iter()
        .map(|a| C64::new(a, 0.0))
        .collect();
    let state = OpticalState::from_amplitudes(amps);
    state.check_converged()?;
    let (state, norm) = state.normalize();
    if norm == 0.0 {
        return Err(Error::DegenerateCat {
            beta_mag: params.beta_mag,
            phi: params.phi,
        });
    }
    Ok(state)
}

/// `|<a|b>|²` for normalized states.
pub fn fidelity(a: &OpticalState, b: &OpticalState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Orientation of the cat family a state is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CatFrame {
    /// Cats mirror-symmetric about the X axis.
    #[default]
    Axis,
    /// The X-axis family rotated by `arg <a>` of the target.
    Centroid,
    /// The X-axis family rotated by a fixed angle.
    Rotated(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// `|β|` window as multiples of `√<n>`.
    pub beta_window: (f64, f64),
    pub phi_window: (f64, f64),
    pub beta_points: usize,
    pub phi_points: usize,
    /// Number of best coarse candidates refined locally.
    pub refine_candidates: usize,
    pub tolerance: f64,
    pub frame: CatFrame,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            beta_window: (0.8, 1.2),
            phi_window: (0.0, 0.2 * PI),
            beta_points: 41,
            phi_points: 100,
            refine_candidates: 6,
            tolerance: 1e-4,
            frame: CatFrame::Axis,
        }
    }
}

/// Below this fidelity a fit is flagged as not cat-like.
pub const CAT_LIKE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatFit {
    pub params: CatParams,
    pub fidelity: f64,
    /// Rotation applied to the X-axis cat family.
    pub frame_rotation: f64,
    pub cat_like: bool,
}

impl CatFit {
    /// The fitted cat, in the frame of the target.
    pub fn state(&self, n_max: usize) -> Result<OpticalState> {
        Ok(cat_state(self.params, n_max)?.phase_rotate(self.frame_rotation))
    }
}

/// Fidelity of the X-axis cat `(b, φ)` with rotated-frame target
/// amplitudes, using precomputed `ln n!`.
struct Objective<'a> {
    target: &'a [C64],
    ln_fact: Vec<f64>,
}

impl Objective<'_> {
    fn eval(&self, b: f64, phi: f64) -> f64 {
        if !(b > 0.0) || !(phi > 0.0 && phi < PI) {
            return 0.0;
        }
        let ln_b = b.ln();
        let half = -0.5 * b * b;
        let mut overlap = C64::new(0.0, 0.0);
        let mut norm = 0.0;
        for (n, t) in self.target.iter().enumerate() {
            let ln_mag = half + n as f64 * ln_b - 0.5 * self.ln_fact[n];
            if ln_mag < -745.0 {
                continue;
            }
            let a = (n as f64 * phi).sin() * ln_mag.exp();
            overlap += t * a;
            norm += a * a;
        }
        if norm == 0.0 {
            0.0
        } else {
            overlap.norm_sqr() / norm
        }
    }
}

pub fn fit_cat(state: &OpticalState) -> Result<CatFit> {
    fit_cat_with(state, &FitOptions::default())
}

/// Two-stage best-fit cat search: a coarse `(|β|, φ)` grid followed by
/// Nelder–Mead refinement of the best few grid points (the fidelity
/// landscape has several local optima).
pub fn fit_cat_with(state: &OpticalState, opts: &FitOptions) -> Result<CatFit> {
    if state.norm_sqr() == 0.0 {
        return Err(Error::invalid("state", "cannot fit a zero vector"));
    }
    let (state, _) = state.clone().normalize();
    let rotation = match opts.frame {
        CatFrame::Axis => 0.0,
        CatFrame::Rotated(r) => r,
        CatFrame::Centroid => state.ladder_moments().0.arg(),
    };
    let target = if rotation == 0.0 {
        state.clone()
    } else {
        state.phase_rotate(-rotation)
    };
    let objective = Objective {
        target: target.amps(),
        ln_fact: (0..target.dim()).map(ln_factorial).collect(),
    };

    let scale = state.mean_photon_number().sqrt().max(1e-3);
    let (b_lo, b_hi) = (opts.beta_window.0 * scale, opts.beta_window.1 * scale);
    let (p_lo, p_hi) = opts.phi_window;
    let nb = opts.beta_points.max(2);
    let np = opts.phi_points.max(1);
    let b_step = (b_hi - b_lo) / (nb - 1) as f64;
    let p_step = (p_hi - p_lo) / np as f64;
    // φ samples exclude the lower edge: (p_lo, p_hi].
    let coarse: Vec<(f64, f64, f64)> = map_indices(nb * np, |idx| {
        let b = b_lo + (idx / np) as f64 * b_step;
        let p = p_lo + ((idx % np) + 1) as f64 * p_step;
        (objective.eval(b, p), b, p)
    });
    let mut ranked = coarse;
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for &(_, b, p) in &ranked {
        if seeds.len() >= opts.refine_candidates.max(1) {
            break;
        }
        // Skip grid neighbours of a seed already taken.
        if seeds
            .iter()
            .any(|&(sb, sp)| (sb - b).abs() <= 1.5 * b_step && (sp - p).abs() <= 1.5 * p_step)
        {
            continue;
        }
        seeds.push((b, p));
    }
    for (b, p) in seeds {
        let lo = [1e-9, 1e-9];
        let hi = [f64::INFINITY, PI - 1e-9];
        let (x, f) = nelder_mead(
            |v| -objective.eval(v[0], v[1]),
            [b, p],
            [0.5 * b_step, 0.5 * p_step],
            lo,
            hi,
            opts.tolerance * 0.1,
        );
        let f = -f;
        if f > best.0 {
            best = (f, x[0], x[1]);
        }
    }
    let (fid, beta_mag, phi) = best;
    Ok(CatFit {
        params: CatParams {
            beta_mag,
            phi,
            fidelity: Some(fid),
        },
        fidelity: fid,
        frame_rotation: rotation,
        cat_like: fid >= CAT_LIKE_THRESHOLD,
    })
}

/// Bounded 2-D Nelder–Mead; stops when the simplex spans less than `tol`
/// in both coordinates.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    tol: f64,
) -> ([f64; 2], f64) {
    let clamp = |v: [f64; 2]| [v[0].clamp(lo[0], hi[0]), v[1].clamp(lo[1], hi[1])];
    let mut pts = [
        clamp(start),
        clamp([start[0] + step[0], start[1]]),
        clamp([start[0], start[1] + step[1]]),
    ];
    let mut vals = pts.map(&f);
    for _ in 0..2000 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);
        let span = |k: usize| {
            let c: Vec<f64> = pts.iter().map(|p| p[k]).collect();
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - c.iter().copied().fold(f64::INFINITY, f64::min)
        };
        if span(0) < tol && span(1) < tol {
            break;
        }
        let centroid = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| {
            clamp([
                centroid[0] + t * (pts[2][0] - centroid[0]),
                centroid[1] + t * (pts[2][1] - centroid[1]),
            ])
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = if fr < vals[2] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(contracted);
            if fc < vals[2].min(fr) {
                pts[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = clamp([
                        pts[0][0] + 0.5 * (pts[k][0] - pts[0][0]),
                        pts[0][1] + 0.5 * (pts[k][1] - pts[0][1]),
                    ]);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    (pts[best], vals[best])
}

/// `<X_θ²> − <X_θ>²` by applying `X_θ` to the state.
pub fn quadrature_variance(state: &OpticalState, theta: f64) -> f64 {
    let norm_sqr = state.norm_sqr();
    let v = state.apply_quadrature(theta);
    let mean = state.inner(&v).map(|z| z.re).unwrap_or(0.0) / norm_sqr;
    v.norm_sqr() / norm_sqr - mean * mean
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetrologyReport {
    pub theta_opt: f64,
    /// Quadrature-optimized quantum Fisher information `4 max_θ Var X_θ`.
    pub fisher: f64,
    /// `max(fisher − 2, 0) / 4`.
    pub power: f64,
    /// `Var X` at `θ = 0`.
    pub var_x: f64,
}

const THETA_POINTS: usize = 721;
/// `|F − 2|` below this is rounding noise of a coherent (minimum-uncertainty) state.
const FISHER_NOISE: f64 = 1e-10;

/// Metrological power of a pure state. `Var X_θ = ½ + n_c + Re(e^{−2iθ} m_c)`
/// with the central moments `n_c = <a†a> − |<a>|²`, `m_c = <a²> − <a>²`;
/// the maximum is located on a θ grid and refined by golden-section search.
pub fn metrological_power(state: &OpticalState) -> MetrologyReport {
    let (a1, a2) = state.ladder_moments();
    let n_c = state.mean_photon_number() - a1.norm_sqr();
    let m_c = a2 - a1 * a1;
    let var = |theta: f64| 0.5 + n_c + (C64::from_polar(1.0, -2.0 * theta) * m_c).re;
    let step = PI / (THETA_POINTS - 1) as f64;
    let best = (0..THETA_POINTS - 1)
        .map(|i| i as f64 * step)
        .max_by(|a, b| var(*a).total_cmp(&var(*b)))
        .unwrap_or(0.0);
    let theta_opt = golden_max(&var, best - step, best + step, 1e-12).rem_euclid(PI);
    let mut fisher = 4.0 * var(theta_opt).max(0.0);
    if (fisher - 2.0).abs() < FISHER_NOISE {
        fisher = 2.0;
    }
    MetrologyReport {
        theta_opt,
        fisher,
        power: (fisher - 2.0).max(0.0) / 4.0,
        var_x: quadrature_variance(state, 0.0),
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
