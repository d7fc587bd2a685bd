//! Electron–photon scattering, electron post-selection and the channel
//! picture of the resulting conditional optical state.
//!
//! With the electron starting on ladder index 0 and the light in `|α>`, the
//! sector of the joint state with electron index `k` is
//!
//! ```text
//! |ψ_k> = e^{-|g|²/2} Σ_{j ≥ max(0,-k)} g^j (−g*)^{j+k} α^{j+k} / (j! (j+k)!) · (a†)^j |α>
//! ```
//!
//! and `<ψ_k|ψ_k>` is the probability of heralding index `k`. Three
//! independent evaluations are provided: the channel series above (summed
//! in double-double arithmetic), the Fock-basis closed form in terms of
//! associated Laguerre functions, and a direct sum for the success
//! probability.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::fock::{LogCoefficient, OpticalState, TAIL_GUARD, TAIL_TOLERANCE};
use crate::special::{laguerre_sequence, ln_binomial, ln_created_norm_sq, ln_factorial};

/// Default Fock truncation, sized for `|α|² = 50` with up to ~30 added photons.
pub const DEFAULT_N_MAX: usize = 256;

/// Relative coefficient threshold below which channels are dropped.
pub const CHANNEL_CUTOFF: f64 = 1e-12;
/// Hard cap on the number of enumerated channels.
pub const MAX_CHANNELS: usize = 200;

/// Largest `|α|²` the double-double series accepts before `e^{-|α|²/2}` underflows.
const SERIES_MAX_ALPHA_SQ: f64 = 1200.0;
/// Last series term relative to the norm of the partial sum.
const SERIES_TOLERANCE: f64 = 1e-16;

/// Physical inputs of one scattering event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    /// Quantum coupling constant (dimensionless).
    pub g: C64,
    /// Coherent amplitude of the input light.
    pub alpha: C64,
    pub n_max: usize,
    /// Inclusive window of electron ladder indices kept in the joint state.
    pub k_range: (i64, i64),
}

impl CouplingConfig {
    /// Real, positive `g` and `α` with default truncations.
    pub fn new(g_mag: f64, alpha_sq: f64) -> Self {
        let alpha_abs = alpha_sq.max(0.0).sqrt();
        CouplingConfig {
            g: C64::new(g_mag, 0.0),
            alpha: C64::new(alpha_abs, 0.0),
            n_max: DEFAULT_N_MAX,
            k_range: suggested_k_range(g_mag, alpha_abs),
        }
    }

    pub fn with_g(self, g: C64) -> Self {
        CouplingConfig { g, ..self }
    }

    pub fn with_alpha(self, alpha: C64) -> Self {
        CouplingConfig { alpha, ..self }
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        CouplingConfig { n_max, ..self }
    }

    pub fn with_k_range(self, k_min: i64, k_max: i64) -> Self {
        CouplingConfig {
            k_range: (k_min, k_max),
            ..self
        }
    }

    pub fn g_mag(&self) -> f64 {
        self.g.norm()
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.re.is_finite() && self.g.im.is_finite()) {
            return Err(Error::invalid("g", "must be finite"));
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if self.n_max <= TAIL_GUARD {
            return Err(Error::invalid(
                "n_max",
                format!("must exceed the {TAIL_GUARD}-level tail guard"),
            ));
        }
        let (lo, hi) = self.k_range;
        if lo > 0 || hi < 0 {
            return Err(Error::invalid(
                "k_range",
                format!("[{lo}, {hi}] must contain 0"),
            ));
        }
        Ok(())
    }
}

/// Symmetric electron window `[-K, K]` with `K = ⌈4|g|(|α|+1)⌉ + 10`,
/// which keeps the discarded sector mass below `1e-10` (at `|g| = 2`,
/// `|α|² = 50` the sectors `|k| = 40` still carry `1.6e-4`).
pub fn suggested_k_range(g_mag: f64, alpha_abs: f64) -> (i64, i64) {
    let k = (4.0 * g_mag.abs() * (alpha_abs + 1.0)).ceil() as i64 + 10;
    (-k, k)
}

/// A normalized conditional state and the norm of the unnormalized sector,
/// so that `norm²` is the probability of heralding it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub k: i64,
    pub state: OpticalState,
    pub norm: f64,
}

impl ConditionalState {
    pub fn probability(&self) -> f64 {
        self.norm * self.norm
    }
}

/// `ln(b^e)` with the convention `0^0 = 1`.
fn ln_pow(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        0.0
    } else if base == 0.0 {
        f64::NEG_INFINITY
    } else {
        exp * base.ln()
    }
}

/// Global factor of sector `k` once `α` has been reduced to `|α|`:
/// `(−g*)^k` for `k ≥ 0` and `g^{|k|}` for `k < 0`.
fn sector_phase_factor(g: C64, k: i64) -> C64 {
    let unit = |z: C64| {
        if z.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            z / z.norm()
        }
    };
    if k >= 0 {
        unit(-g.conj()).powi(k as i32)
    } else {
        unit(g).powi((-k) as i32)
    }
}

/// Unnormalized sector amplitudes from the Laguerre closed form, evaluated
/// directly with complex `α`.
fn closed_amplitudes(cfg: &CouplingConfig, k: i64) -> Vec<C64> {
    let n_max = cfg.n_max;
    let x = cfg.g.norm_sqr();
    let g_abs = cfg.g.norm();
    let alpha = cfg.alpha;
    let prefactor = -0.5 * (alpha.norm_sqr() + x);
    let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
    let n_start = if k >= 0 { 0 } else { (-k) as usize };
    if n_start > n_max {
        return amps;
    }
    let kk = k.unsigned_abs() as usize;
    let ln_g_part = ln_pow(g_abs, kk as f64);
    let phase_g = sector_phase_factor(cfg.g, k);
    // L_n^(k) for n = 0..=n_max (k >= 0) or L_{k+n}^(|k|) for n = |k|..=n_max (k < 0).
    let laguerre = if k >= 0 {
        laguerre_sequence(n_max, k, x)
    } else {
        laguerre_sequence(n_max - n_start, -k, x)
    };
    for n in n_start..=n_max {
        let power = (k + n as i64) as u32;
        let alpha_pow = LogCoefficient::powi(alpha, power);
        let (ln_rest, lag) = if k >= 0 {
            (0.5 * ln_factorial(n) - ln_factorial(n + kk), laguerre[n])
        } else {
            (-0.5 * ln_factorial(n), laguerre[n - n_start])
        };
        let coeff = alpha_pow.scale_log(prefactor + ln_g_part + ln_rest);
        amps[n] = coeff.value() * phase_g * lag;
    }
    amps
}

fn relative_tail(amps: &[C64]) -> f64 {
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let cutoff = (amps.len() - 1).saturating_sub(TAIL_GUARD);
    amps[cutoff + 1..].iter().map(|a| a.norm_sqr()).sum::<f64>() / total
}

fn truncation_error(n_max: usize, tail_mass: f64) -> Error {
    Error::TruncationTooSmall {
        n_max,
        cutoff: n_max.saturating_sub(TAIL_GUARD),
        tail_mass,
        tolerance: TAIL_TOLERANCE,
    }
}

fn finish_sector(k: i64, amps: Vec<C64>, n_max: usize) -> Result<ConditionalState> {
    let tail = relative_tail(&amps);
    if tail >= TAIL_TOLERANCE {
        return Err(truncation_error(n_max, tail));
    }
    let (state, norm) = OpticalState::from_amplitudes(amps).normalize();
    Ok(ConditionalState { k, state, norm })
}

/// Conditional state from the Fock-basis closed form with associated
/// Laguerre functions.
pub fn conditional_state_closed(cfg: &CouplingConfig, k: i64) -> Result<ConditionalState> {
    cfg.validate()?;
    finish_sector(k, closed_amplitudes(cfg, k), cfg.n_max)
}

/// Alias for the closed-form evaluation, the default route.
pub fn conditional_state(cfg: &CouplingConfig, k: i64) -> Result<ConditionalState> {
    conditional_state_closed(cfg, k)
}

/// Conditional state from the channel series `Σ_j C_j (a†)^j |α>`.
///
/// The terms alternate in sign and reach ~1e10 times the result at
/// `|g| = 2, |α|² = 50`, so the sum is carried out in double-double
/// precision. `α` is reduced to `|α|`, the series is summed for the real
/// amplitude and the phase is restored with [`phase_rotate`]. `j_max` is
/// extended automatically until the last term is below `1e-16` of the partial sum.
pub fn conditional_state_series(
    cfg: &CouplingConfig,
    k: i64,
    j_max: usize,
) -> Result<ConditionalState> {
    cfg.validate()?;
    let a = cfg.alpha.norm();
    if a * a > SERIES_MAX_ALPHA_SQ {
        return Err(Error::invalid(
            "alpha",
            format!(
                "|α|² = {} exceeds the series range {SERIES_MAX_ALPHA_SQ}",
                a * a
            ),
        ));
    }
    let x = cfg.g.norm_sqr();
    let n_max = cfg.n_max;
    let dim = n_max + 1;
    let j0 = if k < 0 { (-k) as usize } else { 0 };
    let kk = k.unsigned_abs() as usize;

    let sqrt_n: Vec<TwoFloat> = (0..=dim).map(|n| TwoFloat::from(n as f64).sqrt()).collect();
    let inv_sqrt_n: Vec<TwoFloat> = sqrt_n.iter().map(|&v| dd_recip(v)).collect();

    // Coherent amplitudes e^{-a²/2} a^n / √n! by recurrence, in double-double.
    let a_dd = TwoFloat::from(a);
    let mut created: Vec<TwoFloat> = Vec::with_capacity(dim);
    created.push(TwoFloat::from((-0.5 * a * a).exp()));
    for n in 1..dim {
        let prev = created[n - 1];
        created.push(prev * a_dd * inv_sqrt_n[n]);
    }
    // Advance to (a†)^{j0}|a>.
    for _ in 0..j0 {
        created = raise(&created, &sqrt_n);
    }

    // c_i = (−a x)^i / (i! (|k|+i)!), starting from 1/|k|!.
    let step = -TwoFloat::new_mul(a, x);
    let mut coeff = TwoFloat::from(1.0);
    for m in 1..=kk {
        coeff *= dd_recip(TwoFloat::from(m as f64));
    }

    let ln_term = |i: usize| -> f64 {
        let j = i + j0;
        ln_pow(a * x, i as f64) - ln_factorial(i) - ln_factorial(kk + i)
            + 0.5 * ln_created_norm_sq(j, a * a)
    };

    let mut acc = vec![TwoFloat::from(0.0); dim];
    let mut max_ln = f64::NEG_INFINITY;
    let hard_cap = (j_max.max(MAX_CHANNELS) + 2 * MAX_CHANNELS).max(j0 + 1);
    let mut i = 0usize;
    loop {
        for (out, v) in acc.iter_mut().zip(&created) {
            *out += coeff * *v;
        }
        let lt = ln_term(i);
        max_ln = max_ln.max(lt);
        let j = i + j0;
        let ln_sum = 0.5 * acc.iter().map(|v| v.hi() * v.hi()).sum::<f64>().ln();
        let converged =
            x == 0.0 || a == 0.0 || (lt < max_ln && lt - ln_sum < SERIES_TOLERANCE.ln());
        if j >= j_max && converged {
            break;
        }
        if j >= hard_cap {
            return Err(Error::invalid(
                "j_max",
                format!("channel series not converged after {j} terms"),
            ));
        }
        i += 1;
        coeff = coeff * step * dd_recip(TwoFloat::from((i * (kk + i)) as f64));
        created = raise(&created, &sqrt_n);
    }

    let global = LogCoefficient::from_log(-0.5 * x + ln_pow(cfg.g.norm(), kk as f64)).value()
        * sector_phase_factor(cfg.g, k)
        * if k >= 0 { a.powi(k as i32) } else { 1.0 };
    let real: Vec<C64> = acc.iter().map(|v| global * f64::from(*v)).collect();
    let mut amps = OpticalState::from_amplitudes(real);
    let phase = cfg.alpha.arg();
    if phase != 0.0 {
        amps = phase_rotate(&amps, phase).scaled(C64::from_polar(1.0, k as f64 * phase));
    }
    finish_sector(k, amps.into_amps(), n_max)
}

/// Reciprocal to full double-double accuracy; the crate's division is
/// only accurate to `f64`.
fn dd_recip(d: TwoFloat) -> TwoFloat {
    let one = TwoFloat::from(1.0);
    let r = TwoFloat::from(1.0 / d.hi());
    let r = r + r * (one - d * r);
    r + r * (one - d * r)
}

fn raise(v: &[TwoFloat], sqrt_n: &[TwoFloat]) -> Vec<TwoFloat> {
    let mut out = vec![TwoFloat::from(0.0); v.len()];
    for n in 0..v.len() - 1 {
        out[n + 1] = v[n] * sqrt_n[n + 1];
    }
    out
}

/// Probability of heralding electron index `k`, summed directly from the
/// squared Laguerre closed form until the terms are negligible.
pub fn success_probability(cfg: &CouplingConfig, k: i64) -> Result<f64> {
    cfg.validate()?;
    let a2 = cfg.alpha.norm_sqr();
    let x = cfg.g.norm_sqr();
    let kk = k.unsigned_abs() as usize;
    let ln_a = 0.5 * a2.ln();
    let base = -(a2 + x) + ln_pow(x, kk as f64);
    let n_start = if k < 0 { kk } else { 0 };
    let limit = 4 * cfg.n_max.max(OpticalState::suggested_n_max(a2.sqrt()));

    // Laguerre index runs over m = n (k >= 0) or m = n + k (k < 0), with order |k|.
    let kf = kk as f64;
    let (mut l_prev, mut l_cur) = (0.0f64, 1.0f64);
    let mut total = 0.0f64;
    let mut past_peak = false;
    for m in 0..=limit {
        if m > 0 {
            let mf = (m - 1) as f64;
            let next = if m == 1 {
                1.0 + kf - x
            } else {
                ((2.0 * mf + 1.0 + kf - x) * l_cur - (mf + kf) * l_prev) / (mf + 1.0)
            };
            l_prev = l_cur;
            l_cur = next;
        }
        let n = m + n_start;
        let power = (k + n as i64) as f64;
        let ln_t = if k >= 0 {
            base + 2.0 * power * ln_a + ln_factorial(n) - 2.0 * ln_factorial(n + kk)
        } else {
            base + 2.0 * power * ln_a - ln_factorial(n)
        };
        let ln_t = if a2 == 0.0 {
            if power == 0.0 {
                base + if k >= 0 { 0.0 } else { -ln_factorial(n) }
            } else {
                f64::NEG_INFINITY
            }
        } else {
            ln_t
        };
        let term = if l_cur == 0.0 {
            0.0
        } else {
            (ln_t + 2.0 * l_cur.abs().ln()).exp()
        };
        total += term;
        if n as f64 > a2 + 4.0 * a2.sqrt() + 2.0 * kf + 10.0 {
            past_peak = true;
        }
        // |L_m^(k)(x)| ≤ C(m+k, m) e^{x/2} bounds the terms near Laguerre zeros.
        let envelope = ln_t + 2.0 * ln_binomial(m + kk, m) + x;
        if past_peak && (total == 0.0 || envelope < (1e-22 * total).ln()) {
            break;
        }
    }
    Ok(total)
}

/// The post-interaction joint state: one unnormalized optical vector per
/// retained electron index.
#[derive(Debug, Clone)]
pub struct JointAmplitudes {
    pub sectors: BTreeMap<i64, OpticalState>,
    pub probabilities: BTreeMap<i64, f64>,
}

impl JointAmplitudes {
    pub fn probability(&self, k: i64) -> f64 {
        self.probabilities.get(&k).copied().unwrap_or(0.0)
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.values().sum()
    }

    pub fn sector(&self, k: i64) -> Option<&OpticalState> {
        self.sectors.get(&k)
    }
}

/// Builds every sector in `cfg.k_range` from the closed form.
pub fn entangled_state(cfg: &CouplingConfig) -> Result<JointAmplitudes> {
    cfg.validate()?;
    let (lo, hi) = cfg.k_range;
    let mut sectors = BTreeMap::new();
    let mut probabilities = BTreeMap::new();
    let mut tail = 0.0;
    for k in lo..=hi {
        let amps = closed_amplitudes(cfg, k);
        let state = OpticalState::from_amplitudes(amps);
        let p = state.norm_sqr();
        if p == 0.0 && cfg.g.norm() == 0.0 && k != 0 {
            continue;
        }
        tail += relative_tail(state.amps()) * p;
        probabilities.insert(k, p);
        sectors.insert(k, state);
    }
    if tail >= TAIL_TOLERANCE {
        return Err(truncation_error(cfg.n_max, tail));
    }
    let mass: f64 = probabilities.values().sum();
    if mass < 1.0 - 1e-10 {
        return Err(Error::KRangeTooSmall {
            k_min: lo,
            k_max: hi,
            mass,
        });
    }
    Ok(JointAmplitudes {
        sectors,
        probabilities,
    })
}

/// How `‖(a†)^j|α>‖` is evaluated when weighting channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelNorm {
    /// `√(j! L_j(−|α|²))`.
    #[default]
    Exact,
    /// `|α|^j`, valid for `|α|² ≫ j`.
    LargeAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Number of photons re-emitted after absorbing `j + k`.
    pub j: usize,
    /// `C_j^(k)` with the normalizer chosen real and positive.
    pub coeff: LogCoefficient,
    /// `|C̃_j^(k)| = ‖(a†)^j|α>‖ · |C_j^(k)|`.
    pub weighted_magnitude: f64,
    /// `P_j^(k) = |C̃_j| / Σ_j |C̃_j|`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDecomposition {
    pub k: i64,
    pub mode: ChannelNorm,
    pub channels: Vec<Channel>,
    pub s_even: f64,
    pub s_odd: f64,
}

impl ChannelDecomposition {
    pub fn weight(&self, j: usize) -> f64 {
        self.channels
            .iter()
            .find(|c| c.j == j)
            .map_or(0.0, |c| c.weight)
    }

    pub fn even_odd_ratio(&self) -> f64 {
        self.s_even / self.s_odd
    }

    /// Channels whose weight exceeds `threshold`.
    pub fn significant(&self, threshold: f64) -> Vec<usize> {
        self.channels
            .iter()
            .filter(|c| c.weight > threshold)
            .map(|c| c.j)
            .collect()
    }
}

/// Splits the sector `k` into the channels `(a†)^j a^{j+k}` and their weights.
pub fn channel_decomposition(
    cfg: &CouplingConfig,
    k: i64,
    mode: ChannelNorm,
) -> Result<ChannelDecomposition> {
    cfg.validate()?;
    let x = cfg.g.norm_sqr();
    let a = cfg.alpha.norm();
    let a2 = a * a;
    let g_abs = cfg.g.norm();
    let j0 = if k < 0 { (-k) as usize } else { 0 };
    // Unit phase of (−α|g|²)^j.
    let step_phase = if a == 0.0 {
        C64::new(-1.0, 0.0)
    } else {
        -cfg.alpha / a
    };

    let mut raw: Vec<(usize, LogCoefficient, f64)> = Vec::new();
    let mut max_ln = f64::NEG_INFINITY;
    for j in j0..j0 + MAX_CHANNELS {
        let l = (j as i64 + k) as usize;
        let ln_c = -0.5 * x + ln_pow(g_abs, (j + l) as f64) + ln_pow(a, l as f64)
            - ln_factorial(j)
            - ln_factorial(l);
        let coeff = LogCoefficient {
            log_magnitude: ln_c,
            phase: step_phase.powu(j as u32),
        };
        let ln_norm = match mode {
            ChannelNorm::Exact => 0.5 * ln_created_norm_sq(j, a2),
            ChannelNorm::LargeAlpha => ln_pow(a, j as f64),
        };
        let ln_w = ln_c + ln_norm;
        raw.push((j, coeff, ln_w));
        if ln_w > max_ln {
            max_ln = ln_w;
        } else if ln_w - max_ln < CHANNEL_CUTOFF.ln() || ln_w == f64::NEG_INFINITY {
            break;
        }
    }
    if max_ln == f64::NEG_INFINITY {
        return Err(Error::invalid("g", "sector has no populated channel"));
    }
    let rel: Vec<f64> = raw.iter().map(|(_, _, w)| (w - max_ln).exp()).collect();
    let total: f64 = rel.iter().sum();
    let channels: Vec<Channel> = raw
        .iter()
        .zip(&rel)
        .map(|((j, coeff, ln_w), r)| Channel {
            j: *j,
            coeff: *coeff,
            weighted_magnitude: if *ln_w == f64::NEG_INFINITY {
                0.0
            } else {
                ln_w.exp()
            },
            weight: r / total,
        })
        .collect();
    let s_even = channels
        .iter()
        .filter(|c| c.j % 2 == 0)
        .map(|c| c.weight)
        .sum();
    let s_odd = channels
        .iter()
        .filter(|c| c.j % 2 == 1)
        .map(|c| c.weight)
        .sum();
    Ok(ChannelDecomposition {
        k,
        mode,
        channels,
        s_even,
        s_odd,
    })
}

/// The state created by one channel alone, `(a†)^j|α>` normalized.
pub fn channel_state(cfg: &CouplingConfig, j: usize) -> Result<OpticalState> {
    let coherent = OpticalState::coherent(cfg.alpha, cfg.n_max)?;
    Ok(coherent.apply_creation(j)?.normalize().0)
}

/// `amps[n] → amps[n] e^{inφ}`, i.e. `a → a e^{-iφ}`.
pub fn phase_rotate(state: &OpticalState, phi: f64) -> OpticalState {
    state.phase_rotate(phi)
}
