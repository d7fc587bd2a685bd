//! Wigner functions on rectangular grids, Wigner negativity and quadrature
//! marginals.
//!
//! Coordinates are the quadratures `X = (a + a†)/√2`, `Y = (a − a†)/(√2 i)`,
//! in which `W = Tr[ρ D(β) Π D†(β)] / π` with `β = (x + iy)/√2`, the vacuum
//! peaks at `1/π` and `∫ W dx dy = 1`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, OpticalState};
use crate::interaction::{conditional_state, CouplingConfig};
use crate::par::map_indices;
use crate::special::{ln_factorial, HermiteTable};

/// Largest `|W|` tolerated on the grid boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;
/// Allowed deviation of `∫ W` from one before negativity is refused.
pub const NORMALIZATION_TOLERANCE: f64 = 2e-3;
/// Slack on the `|W| ≤ 1/π` bound before a grid is flagged.
pub const BOUND_SLACK: f64 = 5e-3;

const LEVEL_EPS: f64 = 1e-32;
const AUTO_WIDENINGS: usize = 3;

/// The state a phase-space function is evaluated for.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Pure(&'a OpticalState),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a OpticalState> for Source<'a> {
    fn from(s: &'a OpticalState) -> Self {
        Source::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for Source<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        Source::Mixed(r)
    }
}

impl Source<'_> {
    fn check_converged(&self) -> Result<()> {
        match self {
            Source::Pure(s) => s.check_converged(),
            Source::Mixed(r) => r.check_converged(),
        }
    }

    fn quadrature_means(&self) -> (f64, f64) {
        match self {
            Source::Pure(s) => s.quadrature_means(),
            Source::Mixed(r) => r.quadrature_means(),
        }
    }

    fn effective_dim(&self) -> usize {
        match self {
            Source::Pure(s) => s.effective_dim(LEVEL_EPS),
            Source::Mixed(r) => r.effective_dim(LEVEL_EPS),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Source::Pure(s) => s.norm_sqr() == 0.0,
            Source::Mixed(r) => r.trace() == 0.0,
        }
    }

    /// Normalized amplitudes or `ρ / Tr ρ`, cut to the first `dim` levels.
    fn truncated(&self, dim: usize) -> Truncated {
        match self {
            Source::Pure(s) => {
                let inv = 1.0 / s.norm();
                Truncated::Pure(s.amps()[..dim].iter().map(|a| a * inv).collect())
            }
            Source::Mixed(r) => {
                let inv = 1.0 / r.trace();
                let m = r.matrix();
                let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
                for a in 0..dim {
                    for b in 0..dim {
                        rho[a * dim + b] = m[(a, b)] * inv;
                    }
                }
                Truncated::Mixed { rho }
            }
        }
    }
}

enum Truncated {
    Pure(Vec<C64>),
    /// Row-major `ρ_{ab}`.
    Mixed {
        rho: Vec<C64>,
    },
}

/// Uniform sample positions along both quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxes {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub y0: f64,
    pub dy: f64,
    pub ny: usize,
}

impl GridAxes {
    pub fn new(x0: f64, dx: f64, nx: usize, y0: f64, dy: f64, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("grid", "need at least two samples per axis"));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::invalid(
                "grid",
                "spacings must be positive and finite",
            ));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::invalid("grid", "origin must be finite"));
        }
        Ok(GridAxes {
            x0,
            dx,
            nx,
            y0,
            dy,
            ny,
        })
    }

    /// `n × n` samples covering `[cx − w, cx + w] × [cy − w, cy + w]`.
    pub fn centered(cx: f64, cy: f64, half_width: f64, n: usize) -> Result<Self> {
        let step = 2.0 * half_width / (n.max(2) - 1) as f64;
        Self::new(cx - half_width, step, n, cy - half_width, step, n)
    }

    pub fn from_ranges(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let dx = (x.1 - x.0) / (nx.max(2) - 1) as f64;
        let dy = (y.1 - y.0) / (ny.max(2) - 1) as f64;
        Self::new(x.0, dx, nx, y.0, dy, ny)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_end(&self) -> f64 {
        self.y(self.ny - 1)
    }
}

/// How the sample grid is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// `points × points` over `±half_width` around `(<X>, <Y>)`, widened
    /// automatically if the state reaches the boundary.
    Auto {
        points: usize,
        half_width: f64,
    },
    Fixed(GridAxes),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto {
            points: 401,
            half_width: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WignerMethod {
    /// Weyl transform of the position-space density matrix, with Hermite
    /// function tables shared across the grid.
    #[default]
    Weyl,
    /// Expectation of the displaced parity, `O(dim²)` per grid point.
    DisplacedParity,
}

/// Samples `W(x_i, y_j)` stored at `values[i * ny + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub axes: GridAxes,
    pub values: Vec<f64>,
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

impl WignerGrid {
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes.ny + j]
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let GridAxes { nx, ny, dx, dy, .. } = self.axes;
        let mut total = 0.0;
        for i in 0..nx {
            let wi = trapezoid_weight(i, nx);
            let col = &self.values[i * ny..(i + 1) * ny];
            let s: f64 = col
                .iter()
                .enumerate()
                .map(|(j, &w)| trapezoid_weight(j, ny) * f(w))
                .sum();
            total += wi * s;
        }
        total * dx * dy
    }

    /// Trapezoidal `∫ W dx dy`.
    pub fn integral(&self) -> f64 {
        self.weighted_sum(|w| w)
    }

    /// Trapezoidal `∫ |W| dx dy`.
    pub fn abs_integral(&self) -> f64 {
        self.weighted_sum(f64::abs)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Position and value of the most negative sample.
    pub fn argmin(&self) -> (f64, f64, f64) {
        let (idx, v) =
            self.values
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (k, v)| if v < acc.1 { (k, v) } else { acc },
                );
        let ny = self.axes.ny;
        (self.axes.x(idx / ny), self.axes.y(idx % ny), v)
    }

    pub fn boundary_max_abs(&self) -> f64 {
        let GridAxes { nx, ny, .. } = self.axes;
        let mut m = 0.0f64;
        for i in 0..nx {
            m = m
                .max(self.value(i, 0).abs())
                .max(self.value(i, ny - 1).abs());
        }
        for j in 0..ny {
            m = m
                .max(self.value(0, j).abs())
                .max(self.value(nx - 1, j).abs());
        }
        m
    }

    /// Whether any sample violates `|W| ≤ 1/π` by more than [`BOUND_SLACK`].
    pub fn exceeds_wigner_bound(&self) -> bool {
        self.values
            .iter()
            .any(|w| w.abs() > FRAC_1_PI + BOUND_SLACK)
    }

    /// `∫ W dy` at each `x_i`.
    pub fn marginal_x(&self) -> Vec<f64> {
        let GridAxes { nx, ny, dy, .. } = self.axes;
        (0..nx)
            .map(|i| {
                (0..ny)
                    .map(|j| trapezoid_weight(j, ny) * self.value(i, j))
                    .sum::<f64>()
                    * dy
            })
            .collect()
    }

    /// `∫ W dx` at each `y_j`.
    pub fn marginal_y(&self) -> Vec<f64> {
        let GridAxes { nx, ny, dx, .. } = self.axes;
        (0..ny)
            .map(|j| {
                (0..nx)
                    .map(|i| trapezoid_weight(i, nx) * self.value(i, j))
                    .sum::<f64>()
                    * dx
            })
            .collect()
    }
}

/// Wigner function on a grid by the default (Weyl) method.
pub fn wigner<'a>(src: impl Into<Source<'a>>, spec: &GridSpec) -> Result<WignerGrid> {
    wigner_with(src, spec, WignerMethod::default())
}

pub fn wigner_with<'a>(
    src: impl Into<Source<'a>>,
    spec: &GridSpec,
    method: WignerMethod,
) -> Result<WignerGrid> {
    let src = src.into();
    src.check_converged()?;
    if src.is_zero() {
        return Err(Error::invalid(
            "state",
            "zero vector has no Wigner function",
        ));
    }
    match *spec {
        GridSpec::Fixed(axes) => {
            let grid = evaluate(&src, &axes, method);
            check_boundary(grid)
        }
        GridSpec::Auto { points, half_width } => {
            let (cx, cy) = src.quadrature_means();
            let step = 2.0 * half_width / (points.max(2) - 1) as f64;
            let mut half = half_width;
            let mut n = points;
            let mut last = None;
            for _ in 0..=AUTO_WIDENINGS {
                let axes = GridAxes::centered(cx, cy, half, n)?;
                match check_boundary(evaluate(&src, &axes, method)) {
                    Ok(grid) => return Ok(grid),
                    Err(e) => last = Some(e),
                }
                half *= 1.5;
                n = (2.0 * half / step).round() as usize + 1;
            }
            Err(last.expect("at least one attempt"))
        }
    }
}

fn check_boundary(grid: WignerGrid) -> Result<WignerGrid> {
    let boundary = grid.boundary_max_abs();
    if boundary > BOUNDARY_TOLERANCE {
        Err(Error::GridTooSmall { boundary })
    } else {
        Ok(grid)
    }
}

fn evaluate(src: &Source<'_>, axes: &GridAxes, method: WignerMethod) -> WignerGrid {
    let dim = src.effective_dim();
    let data = src.truncated(dim);
    let values = match method {
        WignerMethod::Weyl => weyl_grid(&data, dim, axes),
        WignerMethod::DisplacedParity => {
            let cols = map_indices(axes.nx, |i| {
                (0..axes.ny)
                    .map(|j| displaced_parity(&data, dim, axes.x(i), axes.y(j)))
                    .collect::<Vec<f64>>()
            });
            cols.concat()
        }
    };
    WignerGrid {
        axes: *axes,
        values,
    }
}

/// `W(x, y)` at a single point from the displaced-parity expectation.
pub fn wigner_at<'a>(src: impl Into<Source<'a>>, x: f64, y: f64) -> Result<f64> {
    let src = src.into();
    src.check_converged()?;
    let dim = src.effective_dim();
    Ok(displaced_parity(&src.truncated(dim), dim, x, y))
}

/// `Tr[ρ D(β) Π D†(β)] / π` with `D(β) Π D†(β) = D(2β) Π`. Along each
/// diagonal `d = m − n` the displacement matrix elements are
/// `ℓ_n^(d)(x) e^{idθ}` with `x = |2β|²`, `θ = arg 2β` and
/// `ℓ_n^(d) = √(n!/(n+d)!) L_n^(d)(x) e^{−x/2} x^{d/2}`, which obeys a
/// bounded three-term recurrence in `n`.
fn displaced_parity(data: &Truncated, dim: usize, x: f64, y: f64) -> f64 {
    let gamma = C64::new(x, y) * std::f64::consts::SQRT_2;
    let lag_x = gamma.norm_sqr();
    let theta = gamma.arg();
    let element = |m: usize, n: usize| -> C64 {
        match data {
            Truncated::Pure(c) => c[m] * c[n].conj(),
            Truncated::Mixed { rho, .. } => rho[m * dim + n],
        }
    };
    const BIG: f64 = 1e150;
    let mut total = 0.0;
    for d in 0..dim {
        if lag_x == 0.0 && d > 0 {
            break;
        }
        let df = d as f64;
        let mut log_scale = if d == 0 {
            -0.5 * lag_x
        } else {
            -0.5 * lag_x + 0.5 * df * lag_x.ln() - 0.5 * ln_factorial(d)
        };
        let rot = C64::from_polar(1.0, -df * theta);
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut diag_sum = 0.0;
        for n in 0..dim - d {
            let ell = if cur == 0.0 || log_scale < -745.0 {
                0.0
            } else {
                cur * log_scale.exp()
            };
            if ell != 0.0 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let term = if d == 0 {
                    element(n, n).re
                } else {
                    2.0 * (element(n + d, n) * rot).re
                };
                diag_sum += sign * ell * term;
            }
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + df - lag_x) * cur - (nf * (nf + df)).sqrt() * prev)
                / ((nf + 1.0) * (nf + 1.0 + df)).sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > BIG {
                cur /= BIG;
                prev /= BIG;
                log_scale += BIG.ln();
            }
        }
        total += diag_sum;
    }
    total * FRAC_1_PI
}

/// `W(x, p) = (1/π) ∫ <x−y|ρ|x+y> e^{2ipy} dy`, sampled with a y-step that
/// divides `dx` and is fine enough that the periodic images of W in p do
/// not overlap the grid.
fn weyl_grid(data: &Truncated, dim: usize, axes: &GridAxes) -> Vec<f64> {
    let reach = (2.0 * dim as f64 + 1.0).sqrt() + 8.0;
    let p_extent = reach.max(axes.y0.abs()).max(axes.y_end().abs());
    let h_max = PI / (2.5 * p_extent);
    let r = (axes.dx / h_max).ceil().max(1.0) as usize;
    let du = axes.dx / r as f64;
    let u_lo = (-reach).min(axes.x0);
    let u_hi = reach.max(axes.x_end());
    let off = ((axes.x0 - u_lo) / du).ceil() as usize;
    let count = off + ((u_hi - axes.x0) / du).ceil() as usize + 1;
    let points: Vec<f64> = (0..count)
        .map(|t| axes.x0 + (t as f64 - off as f64) * du)
        .collect();
    let table = HermiteTable::new(dim, &points);

    let kernel = WeylKernel::new(data, dim, &table);
    let (lo, hi) = kernel.support();

    let two_y0 = 2.0 * axes.y0;
    let two_dy = 2.0 * axes.dy;
    let cols = map_indices(axes.nx, |i| {
        let mut acc = vec![0.0f64; axes.ny];
        let c = off + i * r;
        if c < lo || c > hi {
            return acc;
        }
        let reach_l = (c - lo).min(hi - c);
        for l in 0..=reach_l {
            let f = kernel.pair(c - l, c + l);
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            let y = l as f64 * du;
            let weight = if l == 0 { 1.0 } else { 2.0 };
            let g = f * weight * C64::from_polar(1.0, two_y0 * y);
            let step = C64::from_polar(1.0, two_dy * y);
            let mut z = g;
            for a in acc.iter_mut() {
                *a += z.re;
                z *= step;
            }
        }
        for a in acc.iter_mut() {
            *a *= du * FRAC_1_PI;
        }
        acc
    });
    cols.concat()
}

/// Position-space density matrix `<u_s|ρ|u_t>` on a sample set.
enum WeylKernel {
    Pure(Vec<C64>),
    Mixed {
        dim: usize,
        /// `h_m(u_s)` at `[s * dim + m]`.
        h: Vec<f64>,
        /// `Σ_n ρ_{mn} h_n(u_t)` at `[t * dim + m]`.
        b: Vec<C64>,
    },
}

impl WeylKernel {
    fn new(data: &Truncated, dim: usize, table: &HermiteTable) -> Self {
        let np = table.points.len();
        match data {
            Truncated::Pure(c) => {
                let mut psi = vec![C64::new(0.0, 0.0); np];
                for (n, cn) in c.iter().enumerate() {
                    if *cn == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (p, h) in psi.iter_mut().zip(table.row(n)) {
                        *p += cn * h;
                    }
                }
                WeylKernel::Pure(psi)
            }
            Truncated::Mixed { rho, .. } => {
                let mut h = vec![0.0; np * dim];
                for n in 0..dim {
                    for (t, v) in table.row(n).iter().enumerate() {
                        h[t * dim + n] = *v;
                    }
                }
                let rows = map_indices(np, |t| {
                    let ht = &h[t * dim..(t + 1) * dim];
                    (0..dim)
                        .map(|m| {
                            let row = &rho[m * dim..(m + 1) * dim];
                            row.iter().zip(ht).map(|(r, hv)| r * hv).sum::<C64>()
                        })
                        .collect::<Vec<C64>>()
                });
                WeylKernel::Mixed {
                    dim,
                    h,
                    b: rows.concat(),
                }
            }
        }
    }

    #[inline]
    fn pair(&self, s: usize, t: usize) -> C64 {
        match self {
            WeylKernel::Pure(psi) => psi[s] * psi[t].conj(),
            WeylKernel::Mixed { dim, h, b } => {
                let hs = &h[s * dim..(s + 1) * dim];
                let bt = &b[t * dim..(t + 1) * dim];
                hs.iter().zip(bt).map(|(hv, bv)| bv * hv).sum()
            }
        }
    }

    /// Sample range outside which `<u|ρ|u>` is negligible; `|<u|ρ|v>|² ≤
    /// <u|ρ|u><v|ρ|v>` bounds the off-diagonal pairs by it.
    fn support(&self) -> (usize, usize) {
        let diag: Vec<f64> = match self {
            WeylKernel::Pure(psi) => psi.iter().map(|p| p.norm_sqr()).collect(),
            WeylKernel::Mixed { dim, h, .. } => (0..h.len() / dim)
                .map(|t| self.pair(t, t).re.max(0.0))
                .collect(),
        };
        let peak = diag.iter().copied().fold(0.0, f64::max);
        let floor = 1e-30 * peak;
        let lo = diag.iter().position(|&d| d > floor).unwrap_or(0);
        let hi = diag.iter().rposition(|&d| d > floor).unwrap_or(0);
        (lo, hi)
    }
}

/// Wigner negativity `δ = ∫ |W| − 1`, evaluated as `∫ |W| − ∫ W` so the
/// quadrature error of the normalization does not leak into δ.
pub fn negativity(w: &WignerGrid) -> Result<f64> {
    let integral = w.integral();
    if (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::UnnormalizedGrid { integral });
    }
    Ok((w.abs_integral() - integral).max(0.0))
}

/// Probability density of `X_θ = (a e^{−iθ} + a† e^{iθ})/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMarginal {
    pub theta: f64,
    pub coords: Vec<f64>,
    pub density: Vec<f64>,
}

impl QuadratureMarginal {
    /// Trapezoidal integral of the density (uniform coordinates assumed).
    pub fn integral(&self) -> f64 {
        let n = self.coords.len();
        if n < 2 {
            return 0.0;
        }
        let h = (self.coords[n - 1] - self.coords[0]) / (n - 1) as f64;
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| trapezoid_weight(i, n) * d)
            .sum::<f64>()
            * h
    }

    /// Interpolated local maxima of the density above `1e-6` of its maximum.
    pub fn peaks(&self) -> Vec<Extremum> {
        let top = self.density.iter().copied().fold(0.0, f64::max);
        let samples: Vec<(f64, f64)> = self
            .coords
            .iter()
            .copied()
            .zip(self.density.iter().copied())
            .collect();
        local_extrema(&samples)
            .into_iter()
            .filter(|e| e.kind == ExtremumKind::Maximum && e.value > 1e-6 * top)
            .collect()
    }
}

/// Marginal over an automatic window `mean ± max(6, 8σ)` with `points` samples.
pub fn marginal<'a>(
    src: impl Into<Source<'a>>,
    theta: f64,
    points: usize,
) -> Result<QuadratureMarginal> {
    let src = src.into();
    src.check_converged()?;
    let (mx, my) = src.quadrature_means();
    let mean = mx * theta.cos() + my * theta.sin();
    let sd = quadrature_sd(&src, theta);
    let half = (8.0 * sd).max(6.0);
    let n = points.max(2);
    let coords: Vec<f64> = (0..n)
        .map(|i| mean - half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();
    marginal_at(src, theta, &coords)
}

fn quadrature_sd(src: &Source<'_>, theta: f64) -> f64 {
    let (a1, a2, n) = match src {
        Source::Pure(s) => {
            let (a1, a2) = s.ladder_moments();
            (a1, a2, s.mean_photon_number())
        }
        Source::Mixed(r) => {
            let (a1, a2) = r.ladder_moments();
            (a1, a2, r.mean_photon_number())
        }
    };
    let rot = C64::from_polar(1.0, -theta);
    let mean = std::f64::consts::SQRT_2 * (a1 * rot).re;
    let second = 0.5 * (2.0 * (a2 * rot * rot).re + 2.0 * n + 1.0);
    (second - mean * mean).max(0.0).sqrt()
}

/// Marginal sampled at the given coordinates.
pub fn marginal_at<'a>(
    src: impl Into<Source<'a>>,
    theta: f64,
    coords: &[f64],
) -> Result<QuadratureMarginal> {
    let src = src.into();
    src.check_converged()?;
    let dim = src.effective_dim();
    let table = HermiteTable::new(dim, coords);
    let phase: Vec<C64> = (0..dim)
        .map(|n| C64::from_polar(1.0, -(n as f64) * theta))
        .collect();
    let density = match src.truncated(dim) {
        Truncated::Pure(c) => {
            let mut psi = vec![C64::new(0.0, 0.0); coords.len()];
            for n in 0..dim {
                let cn = c[n] * phase[n];
                for (p, h) in psi.iter_mut().zip(table.row(n)) {
                    *p += cn * h;
                }
            }
            psi.iter().map(|p| p.norm_sqr()).collect()
        }
        Truncated::Mixed { rho, .. } => (0..coords.len())
            .map(|i| {
                let mut s = C64::new(0.0, 0.0);
                for m in 0..dim {
                    let hm = table.row(m)[i] * phase[m];
                    for n in 0..dim {
                        s += rho[m * dim + n] * hm * phase[n].conj() * table.row(n)[i];
                    }
                }
                s.re.max(0.0)
            })
            .collect(),
    };
    Ok(QuadratureMarginal {
        theta,
        coords: coords.to_vec(),
        density,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub g: f64,
    pub negativity: Result<f64>,
}

/// `δ(|g|)` for the conditional state of sector `k`, one independent
/// evaluation per coupling; failures are reported per point.
pub fn negativity_sweep(
    template: &CouplingConfig,
    k: i64,
    g_values: &[f64],
    grid: &GridSpec,
) -> Vec<SweepPoint> {
    map_indices(g_values.len(), |idx| {
        let g = g_values[idx];
        let cfg = template.with_g(C64::new(g, 0.0));
        let negativity = conditional_state(&cfg, k)
            .and_then(|c| wigner(&c.state, grid))
            .and_then(|w| negativity(&w));
        SweepPoint { g, negativity }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub position: f64,
    pub value: f64,
}

/// Interior local extrema of a sampled curve, refined by the parabola
/// through the extremal sample and its neighbours. Flat runs do not count.
pub fn local_extrema(samples: &[(f64, f64)]) -> Vec<Extremum> {
    let mut out = Vec::new();
    for w in samples.windows(3) {
        let [(x0, y0), (x1, y1), (x2, y2)] = [w[0], w[1], w[2]];
        let kind = if y1 > y0 && y1 >= y2 {
            ExtremumKind::Maximum
        } else if y1 < y0 && y1 <= y2 {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        let (position, value) = if a != 0.0 && a.is_finite() {
            let xv = (-b / (2.0 * a)).clamp(x0, x2);
            let c = y1 - a * x1 * x1 - b * x1;
            (xv, a * xv * xv + b * xv + c)
        } else {
            (x1, y1)
        };
        out.push(Extremum {
            kind,
            position,
            value,
        });
    }
    out
}
