//! WebAssembly bindings for the browser demo.
//!
//! Each export takes a coefficient file as a JSON string (the same format the
//! CLI reads) and returns a flat `Float64Array`.

use degdiff::coefficients::{CoefficientFile, Density};
use degdiff::flow::FlowMap;
use degdiff::kernel::{heat_kernel, KernelQuery};
use degdiff::metric_volume::ball_volume_curve;
use degdiff::numerics::{TestFunction, Window};
use degdiff::operators::apply_semigroup_subordination;
use wasm_bindgen::prelude::*;

fn setup(coef_json: &str) -> degdiff::Result<(FlowMap, Density)> {
    let (coef, rho) = CoefficientFile::parse(coef_json)?.build()?;
    Ok((FlowMap::new(&coef)?, rho))
}

/// `y ↦ K_t(x; y)` on an evenly spaced grid.
pub fn kernel_slice(
    coef_json: &str,
    t: f64,
    x: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> degdiff::Result<Vec<f64>> {
    let (fm, rho) = setup(coef_json)?;
    let w = Window::new(lo, hi, points)?;
    w.points()
        .map(|y| heat_kernel(&fm, &rho, KernelQuery::new(t, x, y)?))
        .collect()
}

/// `S_t` applied to a bump, sampled on an evenly spaced grid.
pub fn semigroup_bump(
    coef_json: &str,
    t: f64,
    center: f64,
    halfwidth: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> degdiff::Result<Vec<f64>> {
    let (fm, _) = setup(coef_json)?;
    let phi = TestFunction::bump(center, halfwidth, 1.0)?;
    let w = Window::new(lo, hi, points)?;
    Ok(apply_semigroup_subordination(&fm, t, &phi, &w, 12.0)?.values().to_vec())
}

/// Doubling ratios `V(x;2r)/V(x;r)` at the given radii.
pub fn doubling_ratios(coef_json: &str, center: f64, radii: &[f64]) -> degdiff::Result<Vec<f64>> {
    let (fm, rho) = setup(coef_json)?;
    Ok(ball_volume_curve(&fm, &rho, center, radii)?.doubling_ratios)
}

fn js(e: degdiff::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = kernelSlice)]
pub fn kernel_slice_js(
    coef_json: &str,
    t: f64,
    x: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    kernel_slice(coef_json, t, x, lo, hi, points).map_err(js)
}

#[wasm_bindgen(js_name = semigroupBump)]
pub fn semigroup_bump_js(
    coef_json: &str,
    t: f64,
    center: f64,
    halfwidth: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    semigroup_bump(coef_json, t, center, halfwidth, lo, hi, points).map_err(js)
}

#[wasm_bindgen(js_name = doublingRatios)]
pub fn doubling_ratios_js(coef_json: &str, center: f64, radii: Vec<f64>) -> Result<Vec<f64>, JsError> {
    doubling_ratios(coef_json, center, &radii).map_err(js)
}
