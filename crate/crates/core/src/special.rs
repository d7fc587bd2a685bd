//! Special functions used throughout the Fock-space code.
//!
//! Factorials and binomials are only ever needed as logarithms: `150!` is
//! already outside the double-precision range, while the amplitudes built
//! from it are O(1).

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

const LN_FACTORIAL_TABLE: usize = 4096;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACTORIAL_TABLE + 1);
        let mut acc = 0.0f64;
        table.push(0.0);
        for k in 1..=LN_FACTORIAL_TABLE {
            acc += (k as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `ln n!`, exact to double rounding for `n <= 4096` and Stirling beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= LN_FACTORIAL_TABLE {
        ln_factorial_table()[n]
    } else {
        ln_gamma_stirling(n as f64 + 1.0)
    }
}

fn ln_gamma_stirling(x: f64) -> f64 {
    // Asymptotic series; only used for x > 4096 where the first terms are exact to 1e-20.
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Stable log-sum-exp of a sequence of logarithms.
pub fn ln_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Generalized Laguerre function `L_n^(k)(x)` by upward recurrence in `n`.
///
/// `k` may be negative as long as `k >= -n`. Only `x >= 0` is used by the
/// callers, which is the regime where the upward recurrence is stable.
pub fn laguerre_assoc(n: usize, k: i64, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + k - x) * cur - (m + k) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `[L_0^(k)(x), ..., L_n^(k)(x)]` from a single recurrence pass.
pub fn laguerre_sequence(n: usize, k: i64, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + kf - x);
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + kf - x) * out[m] - (mf + kf) * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

/// `ln( j! L_j(-y) )` for `y >= 0`, i.e. the log squared norm of `(a†)^j|α>`
/// for a normalized coherent state with `|α|² = y`.
///
/// All terms of the explicit sum are positive here, so there is no cancellation.
pub fn ln_created_norm_sq(j: usize, y: f64) -> f64 {
    if y == 0.0 {
        return ln_factorial(j);
    }
    let ln_y = y.ln();
    let terms: Vec<f64> = (0..=j)
        .map(|i| ln_binomial(j, i) + ln_factorial(j) - ln_factorial(i) + i as f64 * ln_y)
        .collect();
    ln_sum_exp(&terms)
}

/// Table of harmonic-oscillator eigenfunctions `h_n(x)` (position
/// representation of `|n>` with `X = (a + a†)/√2`), laid out as
/// `values[n * points.len() + i]`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    pub n_count: usize,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl HermiteTable {
    pub fn new(n_count: usize, points: &[f64]) -> Self {
        let np = points.len();
        let mut values = vec![0.0; n_count * np];
        // The recurrence runs on a rescaled pair so that large |x| does not
        // underflow h_0 before the growth in n catches up.
        const BIG: f64 = 1e150;
        let ln_big = BIG.ln();
        let ln_h0_norm = -0.25 * std::f64::consts::PI.ln();
        for (i, &x) in points.iter().enumerate() {
            let mut log_scale = ln_h0_norm - 0.5 * x * x;
            let mut prev = 0.0;
            let mut cur = 1.0;
            for n in 0..n_count {
                values[n * np + i] = if log_scale > -700.0 {
                    cur * log_scale.exp()
                } else if cur == 0.0 {
                    0.0
                } else {
                    cur.signum() * (cur.abs().ln() + log_scale).exp()
                };
                let nf = n as f64;
                let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
                if cur.abs() > BIG {
                    cur /= BIG;
                    prev /= BIG;
                    log_scale += ln_big;
                }
            }
        }
        HermiteTable {
            n_count,
            points: points.to_vec(),
            values,
        }
    }

    #[inline]
    pub fn row(&self, n: usize) -> &[f64] {
        let np = self.points.len();
        &self.values[n * np..(n + 1) * np]
    }
}

/// Gauss–Hermite nodes and weights for `∫ e^{-x²} f(x) dx` (Golub–Welsch).
/// Nodes are returned in ascending order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_hermite needs at least one node");
    let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], sqrt_pi * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize: the eigen-solver leaves ~1e-16 asymmetry in the nodes.
    for i in 0..n / 2 {
        let (xl, wl) = pairs[i];
        let (xr, wr) = pairs[n - 1 - i];
        let x = 0.5 * (xr - xl);
        let w = 0.5 * (wl + wr);
        pairs[i] = (-x, w);
        pairs[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laguerre_series(n: usize, k: i64, x: f64) -> f64 {
        // Σ_i (-1)^i C(n+k, n-i) x^i / i!, valid for n + k >= 0.
        let top = (n as i64 + k) as usize;
        (0..=n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let c = if n - i > top {
                    0.0
                } else {
                    ln_binomial(top, n - i).exp()
                };
                sign * c * x.powi(i as i32) / ln_factorial(i).exp()
            })
            .sum()
    }

    #[test]
    fn laguerre_low_orders() {
        for &x in &[0.0, 0.3, 2.5] {
            for k in -1..4 {
                assert_eq!(laguerre_assoc(0, k, x), 1.0);
            }
            assert_relative_eq!(laguerre_assoc(1, 0, x), 1.0 - x, epsilon = 1e-15);
            assert_relative_eq!(laguerre_assoc(1, 3, x), 4.0 - x, epsilon = 1e-15);
            let l2 = 0.5 * (x * x - 2.0 * (2.0 + 2.0) * x + (2.0 + 1.0) * (2.0 + 2.0));
            assert_relative_eq!(laguerre_assoc(2, 2, x), l2, epsilon = 1e-14);
        }
    }

    #[test]
    fn laguerre_matches_direct_series() {
        let x = 0.17f64 * 0.17;
        assert_relative_eq!(
            laguerre_assoc(5, 2, x),
            laguerre_series(5, 2, x),
            max_relative = 1e-14
        );
        for n in 0..30 {
            for k in [-2i64, 0, 1, 4] {
                if n as i64 + k < 0 {
                    continue;
                }
                let a = laguerre_assoc(n, k, 0.9025);
                let b = laguerre_series(n, k, 0.9025);
                assert!(
                    (a - b).abs() <= 1e-11 * (1.0 + b.abs()),
                    "n={n} k={k}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn laguerre_sequence_agrees_with_pointwise() {
        let seq = laguerre_sequence(40, 3, 4.0);
        for (n, v) in seq.iter().enumerate() {
            assert_eq!(*v, laguerre_assoc(n, 3, 4.0));
        }
    }

    #[test]
    fn log_factorial_matches_naive_product() {
        let mut naive = 1.0f64;
        for n in 0..=150usize {
            if n > 0 {
                naive *= n as f64;
            }
            let rel = (ln_factorial(n).exp() - naive).abs() / naive;
            assert!(rel < 1e-10, "n={n}: rel {rel}");
        }
        // Stirling branch continuity.
        let below = ln_factorial(LN_FACTORIAL_TABLE);
        let above = ln_gamma_stirling(LN_FACTORIAL_TABLE as f64 + 1.0);
        assert_relative_eq!(below, above, max_relative = 1e-14);
    }

    #[test]
    fn created_norm_small_cases() {
        // <α|a a†|α> = 1 + |α|²
        assert_relative_eq!(
            ln_created_norm_sq(1, 50.0).exp(),
            51.0,
            max_relative = 1e-14
        );
        // <α|a² a†²|α> = 2 + 4|α|² + |α|⁴
        assert_relative_eq!(
            ln_created_norm_sq(2, 3.0).exp(),
            2.0 + 12.0 + 9.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(ln_created_norm_sq(4, 0.0).exp(), 24.0, max_relative = 1e-14);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let h = 0.02;
        let pts: Vec<f64> = (0..2001).map(|i| -20.0 + h * i as f64).collect();
        let table = HermiteTable::new(40, &pts);
        for m in [0usize, 1, 7, 39] {
            for n in [0usize, 1, 7, 39] {
                let s: f64 = table
                    .row(m)
                    .iter()
                    .zip(table.row(n))
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    * h;
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10, "<{m}|{n}> = {s}");
            }
        }
    }

    #[test]
    fn hermite_survives_far_tails() {
        let table = HermiteTable::new(300, &[45.0]);
        // h_0(45) underflows, but high orders are representable and finite.
        assert!(table.values.iter().all(|v| v.is_finite()));
        assert!(table.row(299)[0].abs() > 0.0);
    }

    #[test]
    fn gauss_hermite_integrates_moments() {
        let (x, w) = gauss_hermite(21);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert_relative_eq!(m0, sqrt_pi, max_relative = 1e-12);
        assert_relative_eq!(m2, sqrt_pi / 2.0, max_relative = 1e-12);
        assert_relative_eq!(m4, 3.0 * sqrt_pi / 4.0, max_relative = 1e-12);
        assert_eq!(x[10], 0.0);
    }
}
