//! Browser bindings for three interactive views: the exact FW transform
//! along a momentum sweep, the adiabatic-versus-Λ comparison on the Floquet
//! space, and the grid Dirac spectrum before and after the transformation.
//!
//! Every entry point returns a JSON string; the page parses it.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use fwexact::floquet::demonstrate_nonevenness;
use fwexact::matfun::decompose;
use fwexact::models::{floquet_dirac_scalar, floquet_dirac_vector, ModelKind, ModelSpec};
use fwexact::pipeline::run;
use fwexact::{BlockOperator, FwError, Layout, Model, Tolerances};

const MAX_SWEEP_POINTS: u32 = 400;
const MAX_NF: u32 = 16;
const MAX_GRID: u32 = 64;

fn err(e: FwError) -> String {
    e.to_string()
}

/// ‖S‖₂, the positive energy and the largest verified defect for p in
/// [0, p_max] on free-dirac or feshbach-villars.
pub fn sweep_json(model: &str, m: f64, p_max: f64, points: u32) -> Result<Value, String> {
    let kind = ModelKind::parse(model).map_err(err)?;
    let key = match kind {
        ModelKind::FreeDirac => "pz",
        ModelKind::FeshbachVillars => "p",
        _ => return Err(format!("momentum sweep supports free-dirac and feshbach-villars, not {model}")),
    };
    if !(2..=MAX_SWEEP_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_SWEEP_POINTS}"));
    }
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err("p_max must be positive".into());
    }
    let tol = Tolerances::default();
    let mut rows = Vec::with_capacity(points as usize);
    for i in 0..points {
        let p = p_max * i as f64 / (points - 1) as f64;
        let model = ModelSpec::new(kind).with("m", m).with(key, p).build().map_err(err)?;
        let r = run(&model, &tol).map_err(err)?;
        let max_defect = r.diagnostics.values().copied().fold(0.0, f64::max);
        rows.push(json!({
            "p": p,
            "s_norm": r.generator.s.norm_spectral(),
            "energy": r.fw.h_fw.get(0, 0).re,
            "oracle_energy": (m * m + p * p).sqrt(),
            "max_defect": max_defect,
        }));
    }
    Ok(json!({ "model": kind.name(), "points": rows }))
}

/// Central-window odd norms of U(λ_naive)KU(λ_naive)⁻¹ and U(Λ)KU(Λ)‡.
pub fn floquet_json(drive: &str, amplitude: f64, omega: f64, nf: u32, window: u32) -> Result<Value, String> {
    if !(1..=MAX_NF).contains(&nf) {
        return Err(format!("nf must lie in 1..={MAX_NF}"));
    }
    let p = [0.0, 0.0, 0.5];
    let model = match drive {
        "scalar" => floquet_dirac_scalar(1.0, p, amplitude, omega),
        "vector" => floquet_dirac_vector(1.0, p, amplitude, omega),
        other => return Err(format!("drive must be scalar or vector, not {other}")),
    }
    .map_err(err)?;
    let r = demonstrate_nonevenness(&model, nf as usize, window as usize, &[nf as usize], 1e-8).map_err(err)?;
    Ok(json!({
        "odd_norm_lambda_naive": r.odd_norm_lambda_naive,
        "odd_norm_lambda_capital": r.odd_norm_lambda_capital,
        "separation": r.separation_holds(),
        "naive_offdiag_max": r.naive_offdiag_max,
        "naive_sq_defect": r.naive_sq_defect,
    }))
}

fn spectrum(a: &BlockOperator) -> Result<Vec<f64>, String> {
    let d = decompose(a, fwexact::Metric::Hermitian).map_err(err)?;
    Ok(d.real_eigenvalues())
}

/// Spectrum of the grid Dirac Hamiltonian and of the two diagonal blocks of
/// its FW form.
pub fn grid_json(n: u32, v0: f64, v1: f64) -> Result<Value, String> {
    if !(8..=MAX_GRID).contains(&n) || !n.is_power_of_two() {
        return Err(format!("n must be a power of two in 8..={MAX_GRID}"));
    }
    let model = ModelSpec::new(ModelKind::Dirac1D)
        .with("n", n as f64)
        .with("v0", v0)
        .with("v1", v1)
        .build()
        .map_err(err)?;
    let Model::Stationary(split) = &model else { unreachable!() };
    let r = run(&model, &Tolerances::default()).map_err(err)?;
    let half = r.fw.h_fw.dim() / 2;
    let block = |first: usize| -> Result<Vec<f64>, String> {
        let sub = r.fw.h_fw.data().submatrix(first, first, half, half).to_owned();
        spectrum(&BlockOperator::new(sub, Layout::stationary(half).map_err(err)?).map_err(err)?)
    };
    Ok(json!({
        "before": spectrum(&split.hamiltonian())?,
        "upper": block(0)?,
        "lower": block(half)?,
        "odd_norm": r.diagnostics["odd_norm"],
        "spectrum_defect": r.diagnostics["spectrum_defect"],
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn momentum_sweep(model: &str, m: f64, p_max: f64, points: u32) -> Result<String, JsValue> {
    to_js(sweep_json(model, m, p_max, points))
}

#[wasm_bindgen]
pub fn floquet_compare(drive: &str, amplitude: f64, omega: f64, nf: u32, window: u32) -> Result<String, JsValue> {
    to_js(floquet_json(drive, amplitude, omega, nf, window))
}

#[wasm_bindgen]
pub fn grid_spectrum(n: u32, v0: f64, v1: f64) -> Result<String, JsValue> {
    to_js(grid_json(n, v0, v1))
}
