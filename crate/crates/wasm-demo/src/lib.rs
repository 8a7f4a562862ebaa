//! Browser demo bindings: decompose a block covariance, synthesize latent
//! parameters at a chosen (rho, alpha), and render the feasible region as
//! SVG, all from matrix JSON typed into a static page.
//!
//! Build with `wasm-pack build --target web` (requires the
//! wasm32-unknown-unknown toolchain); `www/index.html` loads the generated
//! module directly, no framework or bundler involved.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use crosscov::covariance::Tolerances;
use crosscov::json::{to_json_string, MatrixDoc, ParamsDoc};
use crosscov::parameterization::{
    alpha_bounds, decompose, is_feasible, paired_params, FeasiblePoint,
};
use crosscov::region::{region_grid, render_svg};
use crosscov::BlockCovariance;

#[derive(Serialize)]
struct DecomposeOut {
    u: Vec<f64>,
    v: Vec<f64>,
    d: f64,
    alpha_min: f64,
    alpha_max: f64,
    rho_min: f64,
    sv_ratio: f64,
}

#[derive(Serialize)]
struct ParamsOut {
    #[serde(flatten)]
    params: ParamsDoc,
    min_eig_ee: f64,
    min_eig_zz: f64,
    feasible: bool,
}

fn parse_cov(matrix_json: &str) -> Result<BlockCovariance, String> {
    let doc: MatrixDoc = serde_json::from_str(matrix_json).map_err(|e| e.to_string())?;
    doc.to_cov(&Tolerances::default(), false).map_err(|e| e.to_string())
}

fn decompose_impl(matrix_json: &str) -> Result<String, String> {
    let cov = parse_cov(matrix_json)?;
    let factors = decompose(&cov).map_err(|e| e.to_string())?;
    let bounds = alpha_bounds(&cov, &factors).map_err(|e| e.to_string())?;
    Ok(to_json_string(&DecomposeOut {
        u: factors.u.iter().copied().collect(),
        v: factors.v.iter().copied().collect(),
        d: factors.d,
        alpha_min: bounds.alpha_min,
        alpha_max: bounds.alpha_max,
        rho_min: bounds.rho_min,
        sv_ratio: cov.cross_sv_ratio(),
    }))
}

fn latent_params_impl(matrix_json: &str, rho: f64, alpha: f64) -> Result<String, String> {
    let cov = parse_cov(matrix_json)?;
    let factors = decompose(&cov).map_err(|e| e.to_string())?;
    let bounds = alpha_bounds(&cov, &factors).map_err(|e| e.to_string())?;
    let feasible = is_feasible(&bounds, &FeasiblePoint { rho, alpha });
    let params = paired_params(&cov, &factors, rho, alpha).map_err(|e| e.to_string())?;
    Ok(to_json_string(&ParamsOut {
        params: ParamsDoc::from_params(&params),
        min_eig_ee: params.sigma_ee.symmetric_eigenvalues().min(),
        min_eig_zz: params.sigma_zz.symmetric_eigenvalues().min(),
        feasible,
    }))
}

fn region_svg_impl(matrix_json: &str, steps: usize) -> Result<String, String> {
    let cov = parse_cov(matrix_json)?;
    let factors = decompose(&cov).map_err(|e| e.to_string())?;
    let bounds = alpha_bounds(&cov, &factors).map_err(|e| e.to_string())?;
    Ok(render_svg(&region_grid(&bounds, steps.clamp(2, 512)), &bounds))
}

/// Cross-block factors and feasibility bounds of a matrix document, as
/// JSON.
#[wasm_bindgen]
pub fn decompose_matrix(matrix_json: &str) -> Result<String, JsValue> {
    decompose_impl(matrix_json).map_err(|e| JsValue::from_str(&e))
}

/// Paired-latent parameters at (rho, alpha), as JSON with the minimum
/// eigenvalues of both error covariances.
#[wasm_bindgen]
pub fn latent_params(matrix_json: &str, rho: f64, alpha: f64) -> Result<String, JsValue> {
    latent_params_impl(matrix_json, rho, alpha).map_err(|e| JsValue::from_str(&e))
}

/// The feasible (rho, alpha) region as static SVG markup.
#[wasm_bindgen]
pub fn region_svg(matrix_json: &str, steps: usize) -> Result<String, JsValue> {
    region_svg_impl(matrix_json, steps).map_err(|e| JsValue::from_str(&e))
}

/// A 3+2 block sample matrix with an exactly rank-one cross block, for the
/// demo page's initial state.
#[wasm_bindgen]
pub fn sample_matrix() -> String {
    r#"{"p": 3, "q": 2, "sigma": [
  [7.0, 0.0, 0.0, 1.0, 0.5],
  [0.0, 7.0, 0.0, 2.0, 1.0],
  [0.0, 0.0, 7.0, 3.0, 1.5],
  [1.0, 2.0, 3.0, 9.0, 0.0],
  [0.5, 1.0, 1.5, 0.0, 5.0]
]}"#
    .to_string()
}
