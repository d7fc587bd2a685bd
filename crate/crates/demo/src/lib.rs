//! Browser bindings: Wigner maps, δ(|g|) curves and cat fits for the
//! heralded state.

use catforge_core::cat::fit_cat;
use catforge_core::interaction::{conditional_state, CouplingConfig};
use catforge_core::phase_space::{negativity, wigner, GridSpec};
use catforge_core::OpticalState;
use wasm_bindgen::prelude::*;

const HALF_WIDTH: f64 = 6.0;
const MAX_POINTS: usize = 301;
const MAX_CURVE_STEPS: usize = 400;

fn heralded(g: f64, alpha_sq: f64, k: i32) -> Result<(OpticalState, f64), String> {
    let cfg = CouplingConfig::new(g, alpha_sq);
    let c = conditional_state(&cfg, i64::from(k)).map_err(|e| e.to_string())?;
    Ok((c.state.clone(), c.probability()))
}

fn grid(points: usize) -> Result<GridSpec, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_POINTS}"));
    }
    Ok(GridSpec::Auto {
        points,
        half_width: HALF_WIDTH,
    })
}

#[wasm_bindgen]
pub struct WignerMap {
    values: Vec<f64>,
    nx: usize,
    ny: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    min: f64,
    max: f64,
    negativity: f64,
    probability: f64,
}

#[wasm_bindgen]
impl WignerMap {
    /// Row-major with y varying fastest: `values[i * ny + j] = W(x_i, y_j)`.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[wasm_bindgen(getter)]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[wasm_bindgen(getter)]
    pub fn x0(&self) -> f64 {
        self.x0
    }
    #[wasm_bindgen(getter)]
    pub fn x1(&self) -> f64 {
        self.x1
    }
    #[wasm_bindgen(getter)]
    pub fn y0(&self) -> f64 {
        self.y0
    }
    #[wasm_bindgen(getter)]
    pub fn y1(&self) -> f64 {
        self.y1
    }
    #[wasm_bindgen(getter)]
    pub fn min(&self) -> f64 {
        self.min
    }
    #[wasm_bindgen(getter)]
    pub fn max(&self) -> f64 {
        self.max
    }
    #[wasm_bindgen(getter)]
    pub fn negativity(&self) -> f64 {
        self.negativity
    }
    #[wasm_bindgen(getter)]
    pub fn probability(&self) -> f64 {
        self.probability
    }
}

pub fn compute_wigner_map(
    g: f64,
    alpha_sq: f64,
    k: i32,
    points: usize,
) -> Result<WignerMap, String> {
    let (state, probability) = heralded(g, alpha_sq, k)?;
    let w = wigner(&state, &grid(points)?).map_err(|e| e.to_string())?;
    let negativity = negativity(&w).map_err(|e| e.to_string())?;
    let a = w.axes;
    Ok(WignerMap {
        nx: a.nx,
        ny: a.ny,
        x0: a.x(0),
        x1: a.x_end(),
        y0: a.y(0),
        y1: a.y_end(),
        min: w.min(),
        max: w.max(),
        negativity,
        probability,
        values: (0..a.nx)
            .flat_map(|i| (0..a.ny).map(move |j| (i, j)))
            .map(|(i, j)| w.value(i, j))
            .collect(),
    })
}

/// `[g, δ, Pr]` triples for `steps + 1` couplings in `[0, g_max]`; values
/// that cannot be evaluated (δ of an empty sector) are NaN.
pub fn compute_negativity_curve(
    alpha_sq: f64,
    k: i32,
    g_max: f64,
    steps: usize,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(1..=MAX_CURVE_STEPS).contains(&steps) {
        return Err(format!("steps must lie in 1..={MAX_CURVE_STEPS}"));
    }
    if !(g_max > 0.0 && g_max.is_finite()) {
        return Err("g_max must be positive".into());
    }
    let spec = grid(points)?;
    let mut out = Vec::with_capacity(3 * (steps + 1));
    for i in 0..=steps {
        let g = g_max * i as f64 / steps as f64;
        let (d, p) = match heralded(g, alpha_sq, k) {
            Ok((s, p)) => {
                let d = wigner(&s, &spec).and_then(|w| negativity(&w));
                (d.unwrap_or(f64::NAN), p)
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        out.extend([g, d, p]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub struct CatFitView {
    pub beta_mag: f64,
    pub phi_over_pi: f64,
    pub fidelity: f64,
    pub probability: f64,
}

pub fn compute_cat_fit(g: f64, alpha_sq: f64, k: i32) -> Result<CatFitView, String> {
    let (state, probability) = heralded(g, alpha_sq, k)?;
    let fit = fit_cat(&state).map_err(|e| e.to_string())?;
    Ok(CatFitView {
        beta_mag: fit.params.beta_mag,
        phi_over_pi: fit.params.phi / std::f64::consts::PI,
        fidelity: fit.fidelity,
        probability,
    })
}

#[wasm_bindgen]
pub fn wigner_map(g: f64, alpha_sq: f64, k: i32, points: usize) -> Result<WignerMap, JsError> {
    compute_wigner_map(g, alpha_sq, k, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn negativity_curve(
    alpha_sq: f64,
    k: i32,
    g_max: f64,
    steps: usize,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    compute_negativity_curve(alpha_sq, k, g_max, steps, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cat_fit(g: f64, alpha_sq: f64, k: i32) -> Result<CatFitView, JsError> {
    compute_cat_fit(g, alpha_sq, k).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_matches_the_library() {
        let m = compute_wigner_map(0.17, 50.0, 0, 81).unwrap();
        assert_eq!(m.values.len(), m.nx * m.ny);
        assert!(m.min < 0.0 && m.negativity > 0.3);
        assert!((m.probability - 0.007647).abs() < 1e-5);
    }

    #[test]
    fn curve_is_flat_at_weak_coupling() {
        let c = compute_negativity_curve(50.0, 0, 0.1, 4, 61).unwrap();
        assert_eq!(c.len(), 15);
        assert!(c.chunks(3).all(|t| t[1] < 2e-3));
        assert!(compute_negativity_curve(50.0, 0, 0.1, 0, 61).is_err());
    }

    #[test]
    fn fit_reports_the_even_cat() {
        let f = compute_cat_fit(0.17, 50.0, 0).unwrap();
        assert!((f.fidelity - 0.9938).abs() < 1e-3);
        assert!((f.beta_mag - 7.0).abs() < 0.05);
    }
}
