//! Truncated single-mode Fock space: pure states, density matrices and the
//! ladder-operator algebra on them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// Number of top Fock levels that must stay (almost) empty for a state to
/// count as converged.
pub const TAIL_GUARD: usize = 8;
/// Maximum relative weight allowed in the guard levels.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// A complex number stored as `phase · exp(log_magnitude)`.
///
/// Products of factorials and large powers are formed here and only turned
/// into a double once the result is known to be representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoefficient {
    pub log_magnitude: f64,
    pub phase: C64,
}

impl LogCoefficient {
    pub const ZERO: LogCoefficient = LogCoefficient {
        log_magnitude: f64::NEG_INFINITY,
        phase: C64 { re: 1.0, im: 0.0 },
    };
    pub const ONE: LogCoefficient = LogCoefficient {
        log_magnitude: 0.0,
        phase: C64 { re: 1.0, im: 0.0 },
    };

    pub fn from_complex(z: C64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            return Self::ZERO;
        }
        LogCoefficient {
            log_magnitude: r.ln(),
            phase: z / r,
        }
    }

    pub fn from_log(log_magnitude: f64) -> Self {
        LogCoefficient {
            log_magnitude,
            phase: C64::new(1.0, 0.0),
        }
    }

    /// `z^n`, with `0^0 = 1`.
    pub fn powi(z: C64, n: u32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let base = Self::from_complex(z);
        if base.is_zero() {
            return Self::ZERO;
        }
        LogCoefficient {
            log_magnitude: base.log_magnitude * n as f64,
            phase: base.phase.powu(n),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogCoefficient) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogCoefficient {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            phase: self.phase * other.phase,
        }
    }

    pub fn scale_log(self, log_factor: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogCoefficient {
            log_magnitude: self.log_magnitude + log_factor,
            phase: self.phase,
        }
    }

    pub fn value(&self) -> C64 {
        if self.is_zero() {
            C64::new(0.0, 0.0)
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }

    pub fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }
}

/// Pure state of the optical mode over photon numbers `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalState {
    amps: Vec<C64>,
    normalized: bool,
}

impl OpticalState {
    /// Wraps raw amplitudes; the result is flagged unnormalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "a state needs at least the vacuum level");
        OpticalState {
            amps,
            normalized: false,
        }
    }

    pub fn zero(n_max: usize) -> Self {
        Self::from_amplitudes(vec![C64::new(0.0, 0.0); n_max + 1])
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock(0, n_max)
    }

    pub fn fock(n: usize, n_max: usize) -> Self {
        assert!(n <= n_max, "Fock level {n} outside truncation {n_max}");
        let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
        amps[n] = C64::new(1.0, 0.0);
        OpticalState {
            amps,
            normalized: true,
        }
    }

    /// Coherent state `|α>`, amplitudes built in log space.
    pub fn coherent(alpha: C64, n_max: usize) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
        let half_mean = -0.5 * alpha.norm_sqr();
        for (n, amp) in amps.iter_mut().enumerate() {
            let coeff =
                LogCoefficient::powi(alpha, n as u32).scale_log(half_mean - 0.5 * ln_factorial(n));
            *amp = coeff.value();
        }
        let state = OpticalState {
            amps,
            normalized: false,
        };
        state.check_converged()?;
        let (state, _) = state.normalize();
        Ok(state)
    }

    /// Smallest truncation that the coherent-state tail heuristic accepts.
    pub fn suggested_n_max(alpha_abs: f64) -> usize {
        (alpha_abs * alpha_abs + 10.0 * alpha_abs + 20.0).ceil() as usize
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Divides by the norm and returns it alongside. A zero vector is
    /// returned unchanged (and stays flagged unnormalized) with norm 0.
    pub fn normalize(mut self) -> (Self, f64) {
        let norm = self.norm();
        if norm == 0.0 {
            self.normalized = false;
            return (self, 0.0);
        }
        let inv = 1.0 / norm;
        for a in &mut self.amps {
            *a *= inv;
        }
        self.normalized = true;
        (self, norm)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        OpticalState {
            amps: self.amps.iter().map(|a| a * factor).collect(),
            normalized: self.normalized && (factor.norm() - 1.0).abs() < 1e-15,
        }
    }

    /// Relative weight in the top `TAIL_GUARD` levels.
    pub fn tail_mass(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let cutoff = self.n_max().saturating_sub(TAIL_GUARD);
        let tail: f64 = self.amps[cutoff + 1..].iter().map(|a| a.norm_sqr()).sum();
        tail / total
    }

    pub fn check_converged(&self) -> Result<()> {
        let tail_mass = self.tail_mass();
        if tail_mass < TAIL_TOLERANCE {
            Ok(())
        } else {
            Err(Error::TruncationTooSmall {
                n_max: self.n_max(),
                cutoff: self.n_max().saturating_sub(TAIL_GUARD),
                tail_mass,
                tolerance: TAIL_TOLERANCE,
            })
        }
    }

    /// Highest level carrying more than `eps` of relative weight, plus one.
    pub fn effective_dim(&self, eps: f64) -> usize {
        let total = self.norm_sqr();
        self.amps
            .iter()
            .rposition(|a| a.norm_sqr() > eps * total)
            .map_or(1, |n| n + 1)
    }

    /// `(a†)^j |ψ>`, unnormalized.
    ///
    /// Fails if any of the created weight would land above `n_max - 8`
    /// (including weight pushed past `n_max` and dropped).
    pub fn apply_creation(&self, j: usize) -> Result<Self> {
        if j == 0 {
            return Ok(OpticalState {
                amps: self.amps.clone(),
                normalized: false,
            });
        }
        let n_max = self.n_max();
        let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
        let mut lost = 0.0;
        let mut total = 0.0;
        for (n, a) in self.amps.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            let factor = (0.5 * (ln_factorial(n + j) - ln_factorial(n))).exp();
            let v = a * factor;
            let w = v.norm_sqr();
            total += w;
            if n + j <= n_max {
                out[n + j] = v;
            } else {
                lost += w;
            }
        }
        let state = OpticalState {
            amps: out,
            normalized: false,
        };
        let cutoff = n_max.saturating_sub(TAIL_GUARD);
        let in_tail: f64 = state.amps[cutoff + 1..].iter().map(|a| a.norm_sqr()).sum();
        let tail_mass = if total > 0.0 {
            (lost + in_tail) / total
        } else {
            0.0
        };
        if tail_mass >= TAIL_TOLERANCE {
            return Err(Error::TruncationTooSmall {
                n_max,
                cutoff,
                tail_mass,
                tolerance: TAIL_TOLERANCE,
            });
        }
        Ok(state)
    }

    /// `a^j |ψ>`, unnormalized. Exact within the truncation.
    pub fn apply_annihilation(&self, j: usize) -> Self {
        let n_max = self.n_max();
        let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
        for n in j..=n_max {
            let factor = (0.5 * (ln_factorial(n) - ln_factorial(n - j))).exp();
            out[n - j] = self.amps[n] * factor;
        }
        OpticalState {
            amps: out,
            normalized: false,
        }
    }

    /// `X_θ |ψ> = (a e^{-iθ} + a† e^{iθ})/√2 |ψ>`; the level above `n_max` is dropped.
    pub fn apply_quadrature(&self, theta: f64) -> Self {
        let n_max = self.n_max();
        let e = C64::from_polar(1.0, theta);
        let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
        for n in 0..=n_max {
            let mut v = C64::new(0.0, 0.0);
            if n < n_max {
                v += e.conj() * self.amps[n + 1] * ((n + 1) as f64).sqrt();
            }
            if n > 0 {
                v += e * self.amps[n - 1] * (n as f64).sqrt();
            }
            out[n] = v * std::f64::consts::FRAC_1_SQRT_2;
        }
        OpticalState {
            amps: out,
            normalized: false,
        }
    }

    /// `<u|v> = Σ conj(u_n) v_n`.
    pub fn inner(&self, other: &OpticalState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(u, v)| u.conj() * v)
            .sum())
    }

    /// Multiplies `amps[n]` by `e^{inφ}`.
    pub fn phase_rotate(&self, phi: f64) -> Self {
        OpticalState {
            amps: self
                .amps
                .iter()
                .enumerate()
                .map(|(n, a)| a * C64::from_polar(1.0, n as f64 * phi))
                .collect(),
            normalized: self.normalized,
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        let s: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum();
        s / self.norm_sqr()
    }

    /// `<a>` and `<a²>` for the normalized state.
    pub fn ladder_moments(&self) -> (C64, C64) {
        let norm_sqr = self.norm_sqr();
        let mut a1 = C64::new(0.0, 0.0);
        let mut a2 = C64::new(0.0, 0.0);
        for n in 1..self.dim() {
            let s1 = (n as f64).sqrt();
            a1 += self.amps[n - 1].conj() * self.amps[n] * s1;
            if n >= 2 {
                let s2 = (n as f64 * (n - 1) as f64).sqrt();
                a2 += self.amps[n - 2].conj() * self.amps[n] * s2;
            }
        }
        (a1 / norm_sqr, a2 / norm_sqr)
    }

    /// `(<X>, <Y>)` with `X = (a + a†)/√2`, `Y = (a − a†)/(√2 i)`.
    pub fn quadrature_means(&self) -> (f64, f64) {
        let (a1, _) = self.ladder_moments();
        (
            std::f64::consts::SQRT_2 * a1.re,
            std::f64::consts::SQRT_2 * a1.im,
        )
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        let total = self.norm_sqr();
        self.amps.iter().map(|a| a.norm_sqr() / total).collect()
    }

    /// Approximately equal up to a global phase: `|<a|b>|² ≥ 1 − tol` for normalized inputs.
    pub fn overlap_modulus(&self, other: &OpticalState) -> Result<f64> {
        let ip = self.inner(other)?;
        Ok(ip.norm() / (self.norm() * other.norm()))
    }
}

/// Population below which a level is left out of spectral decompositions.
/// Strongly graded matrices (populations spanning 10⁻¹⁶⁰ and beyond) make the
/// implicit-QR eigen-solver return NaN.
pub const SPECTRUM_EPS: f64 = 1e-40;

/// Eigenvalues of the Hermitian part of the leading `d × d` block, padded
/// with zeros to the full dimension, ascending.
fn hermitian_spectrum(m: &DMatrix<C64>, d: usize) -> Vec<f64> {
    let block = m.view((0, 0), (d, d));
    let herm = (&block + block.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.resize(m.nrows(), 0.0);
    ev.sort_by(f64::total_cmp);
    ev
}

/// Density operator of the optical mode over photon numbers `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &OpticalState) -> Self {
        let norm_sqr = state.norm_sqr();
        let a = state.amps();
        let rho = DMatrix::from_fn(a.len(), a.len(), |m, n| a[m] * a[n].conj() / norm_sqr);
        DensityMatrix { rho }
    }

    /// Wraps a matrix after checking it is a valid density operator.
    pub fn from_matrix(rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch {
                left: rho.nrows(),
                right: rho.ncols(),
            });
        }
        let dm = DensityMatrix { rho };
        let herm = dm.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::invalid(
                "rho",
                format!("not Hermitian (max |ρ − ρ†| = {herm:e})"),
            ));
        }
        let tr = dm.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("rho", format!("trace {tr} != 1")));
        }
        Ok(dm)
    }

    /// Skips validation; for internal maps that preserve the invariants by construction.
    pub(crate) fn from_matrix_unchecked(rho: DMatrix<C64>) -> Self {
        DensityMatrix { rho }
    }

    /// Weighted mixture `Σ w_i |ψ_i><ψ_i| / Σ w_i` of (normalized) pure states.
    pub fn mixture(states: &[(f64, &OpticalState)]) -> Result<Self> {
        let dim = states
            .first()
            .map(|(_, s)| s.dim())
            .ok_or_else(|| Error::invalid("states", "empty mixture"))?;
        let mut rho = DMatrix::<C64>::zeros(dim, dim);
        let mut total = 0.0;
        for (w, s) in states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: s.dim(),
                });
            }
            let p = DensityMatrix::from_pure(s);
            rho += p.rho * C64::new(*w, 0.0);
            total += w;
        }
        rho /= C64::new(total, 0.0);
        Ok(DensityMatrix { rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn element(&self, m: usize, n: usize) -> C64 {
        self.rho[(m, n)]
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for m in 0..d {
            for n in m..d {
                worst = worst.max((self.rho[(m, n)] - self.rho[(n, m)].conj()).norm());
            }
        }
        worst
    }

    /// Spectrum in ascending order. Levels with population at most
    /// [`SPECTRUM_EPS`] are excluded from the decomposition and contribute
    /// zeros: since `|ρ_mn|² ≤ ρ_mm ρ_nn`, this moves each eigenvalue by at
    /// most `√(2 · excluded mass)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_spectrum(&self.rho, self.effective_dim(SPECTRUM_EPS))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `<φ|ρ|φ>` for a normalized `φ`.
    pub fn expectation(&self, phi: &OpticalState) -> Result<f64> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: phi.dim(),
            });
        }
        let a = phi.amps();
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..self.dim() {
            if a[m] == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = C64::new(0.0, 0.0);
            for n in 0..self.dim() {
                row += self.rho[(m, n)] * a[n];
            }
            acc += a[m].conj() * row;
        }
        Ok(acc.re)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let d = self
            .effective_dim(SPECTRUM_EPS)
            .max(other.effective_dim(SPECTRUM_EPS));
        let diff = &self.rho - &other.rho;
        Ok(0.5
            * hermitian_spectrum(&diff, d)
                .iter()
                .map(|e| e.abs())
                .sum::<f64>())
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }

    /// Highest level with population above `eps`, plus one.
    pub fn effective_dim(&self, eps: f64) -> usize {
        self.photon_distribution()
            .iter()
            .rposition(|p| *p > eps)
            .map_or(1, |n| n + 1)
    }

    /// Population above `n_max - 8` relative to the trace.
    pub fn tail_mass(&self) -> f64 {
        let p = self.photon_distribution();
        let cutoff = self.n_max().saturating_sub(TAIL_GUARD);
        p[cutoff + 1..].iter().sum::<f64>() / self.trace()
    }

    pub fn check_converged(&self) -> Result<()> {
        let tail_mass = self.tail_mass();
        if tail_mass < TAIL_TOLERANCE {
            Ok(())
        } else {
            Err(Error::TruncationTooSmall {
                n_max: self.n_max(),
                cutoff: self.n_max().saturating_sub(TAIL_GUARD),
                tail_mass,
                tolerance: TAIL_TOLERANCE,
            })
        }
    }

    /// `(Tr ρa, Tr ρa²)`.
    pub fn ladder_moments(&self) -> (C64, C64) {
        let d = self.dim();
        let mut a1 = C64::new(0.0, 0.0);
        let mut a2 = C64::new(0.0, 0.0);
        for n in 0..d {
            if n + 1 < d {
                a1 += self.rho[(n + 1, n)] * ((n + 1) as f64).sqrt();
            }
            if n + 2 < d {
                a2 += self.rho[(n + 2, n)] * (((n + 1) * (n + 2)) as f64).sqrt();
            }
        }
        (a1, a2)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.photon_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// `(<X>, <Y>)` with `X = (a + a†)/√2`, `Y = (a − a†)/(√2 i)`.
    pub fn quadrature_means(&self) -> (f64, f64) {
        let (a1, _) = self.ladder_moments();
        (
            std::f64::consts::SQRT_2 * a1.re,
            std::f64::consts::SQRT_2 * a1.im,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vacuum_is_zero_amplitude_coherent() {
        let s = OpticalState::coherent(c(0.0), 20).unwrap();
        assert_eq!(s.amps()[0], c(1.0));
        assert!(s.amps()[1..].iter().all(|a| *a == c(0.0)));
        assert!(s.is_normalized());
    }

    #[test]
    fn coherent_fifty_photons() {
        let s = OpticalState::coherent(c(50f64.sqrt()), 256).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.mean_photon_number() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_rejects_short_truncation() {
        // Independent Poisson tail: P(n > 52) for mean 50, by direct summation.
        let mut p = (-50.0f64).exp();
        let mut cdf = p;
        for n in 1..=52 {
            p *= 50.0 / n as f64;
            cdf += p;
        }
        assert!(1.0 - cdf > 1e-10);
        let err = OpticalState::coherent(c(50f64.sqrt()), 60).unwrap_err();
        assert!(matches!(
            err,
            Error::TruncationTooSmall {
                n_max: 60,
                cutoff: 52,
                ..
            }
        ));
    }

    #[test]
    fn creation_identity_and_vacuum() {
        let s = OpticalState::coherent(C64::new(1.0, 0.5), 40).unwrap();
        assert_eq!(s.apply_creation(0).unwrap().amps(), s.amps());
        let one = OpticalState::vacuum(10).apply_creation(1).unwrap();
        assert_eq!(one.amps()[1], c(1.0));
        assert_relative_eq!(one.norm(), 1.0);
        assert!(!one.is_normalized());
    }

    #[test]
    fn creation_norm_matches_laguerre_identity() {
        // <α|a^j (a†)^j|α> = j! L_j(-|α|²) = Σ_i C(j,i)² (j-i)! |α|^{2i}, by direct series.
        let y = 50.0f64;
        let j = 3usize;
        let mut series = 0.0;
        for i in 0..=j {
            let binom = [1.0, 3.0, 3.0, 1.0][i];
            let fact = [6.0, 2.0, 1.0, 1.0][i];
            series += binom * binom * fact * y.powi(i as i32);
        }
        let s = OpticalState::coherent(c(y.sqrt()), 256).unwrap();
        let created = s.apply_creation(j).unwrap();
        assert_relative_eq!(created.norm_sqr(), series, max_relative = 1e-12);
    }

    #[test]
    fn creation_detects_spill() {
        let s = OpticalState::fock(2, 12);
        assert!(s.apply_creation(1).is_ok());
        assert!(s.apply_creation(3).is_err());
    }

    #[test]
    fn inner_products() {
        let a = C64::new(1.2, -0.4);
        let b = C64::new(-0.3, 0.8);
        let sa = OpticalState::coherent(a, 60).unwrap();
        let sb = OpticalState::coherent(b, 60).unwrap();
        let expect = (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp();
        let got = sa.inner(&sb).unwrap();
        assert!((got - expect).norm() < 1e-14);
        assert!((sa.inner(&sa).unwrap() - c(1.0)).norm() < 1e-14);

        let vac = OpticalState::vacuum(256);
        let big = OpticalState::coherent(c(50f64.sqrt()), 256).unwrap();
        let v = vac.inner(&big).unwrap();
        assert_relative_eq!(v.re, (-25.0f64).exp(), max_relative = 1e-12);

        let err = vac.inner(&sa).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                left: 257,
                right: 61
            }
        );
    }

    #[test]
    fn coherent_quadrature_statistics() {
        let alpha = C64::new(2.0, -1.5);
        let s = OpticalState::coherent(alpha, 80).unwrap();
        let (x, y) = s.quadrature_means();
        assert!((x - 2f64.sqrt() * alpha.re).abs() < 1e-9);
        assert!((y - 2f64.sqrt() * alpha.im).abs() < 1e-9);
        let xs = s.apply_quadrature(0.0);
        let x2 = s.inner(&xs.apply_quadrature(0.0)).unwrap().re;
        assert!((x2 - x * x - 0.5).abs() < 1e-9);
    }

    #[test]
    fn canonical_commutator() {
        let s = OpticalState::coherent(C64::new(3.0, 1.0), 80).unwrap();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let xy = s.apply_quadrature(half_pi).apply_quadrature(0.0);
        let yx = s.apply_quadrature(0.0).apply_quadrature(half_pi);
        let comm = s.inner(&xy).unwrap() - s.inner(&yx).unwrap();
        assert!((comm - C64::new(0.0, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn phase_rotation_full_turn() {
        let s = OpticalState::coherent(C64::new(1.0, 2.0), 60).unwrap();
        assert_eq!(s.phase_rotate(0.0), s);
        let r = s.phase_rotate(2.0 * std::f64::consts::PI);
        for (a, b) in r.amps().iter().zip(s.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn log_coefficients() {
        assert_eq!(LogCoefficient::powi(c(0.0), 0).value(), c(1.0));
        assert!(LogCoefficient::powi(c(0.0), 3).is_zero());
        let z = C64::new(0.3, -1.1);
        let p = LogCoefficient::powi(z, 7).value();
        assert!((p - z.powu(7)).norm() < 1e-14);
        let huge = LogCoefficient::powi(c(10.0), 400).scale_log(-400.0 * 10f64.ln());
        assert!((huge.value() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_of_pure_state() {
        let s = OpticalState::coherent(C64::new(1.0, 1.0), 30).unwrap();
        let rho = DensityMatrix::from_pure(&s);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-12);
        assert!((rho.expectation(&s).unwrap() - 1.0).abs() < 1e-12);
        let vac = DensityMatrix::from_pure(&OpticalState::vacuum(30));
        let expect = (1.0 - (-2.0f64).exp()).sqrt();
        assert!((rho.trace_distance(&vac).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 0)] = c(0.5);
        m[(1, 1)] = c(0.5);
        assert!(DensityMatrix::from_matrix(m.clone()).is_ok());
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }
}
