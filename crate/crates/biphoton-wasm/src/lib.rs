//! Thin wasm-bindgen façade over the core crate for the static demo page.
//! Every export returns a flat `Float64Array` (row-major records) so the
//! page needs no JSON layer; errors surface as thrown JS strings.
//!
//! The `*_impl` functions hold the logic and are target-independent (JsValue
//! cannot be constructed on the host), so the unit tests exercise them
//! directly. Build the browser package with
//! `wasm-pack build crates/biphoton-wasm --target web`.

use biphoton::eigensystem::{eigenvalues, find_ep, sweep_eigenvalues};
use biphoton::params::{DopplerModel, FieldParams, SystemParams};
use biphoton::susceptibility::{chi3, symmetric_grid, ChiOptions};
use biphoton::waveform::{ep_limit, g2_two_pole};
use wasm_bindgen::prelude::*;

fn sys_with(gamma21_ratio: f64) -> SystemParams {
    SystemParams {
        gamma21_ratio,
        ..SystemParams::default()
    }
}

fn fields_with(omega3: f64, delta3: f64) -> FieldParams {
    FieldParams {
        omega3,
        delta3,
        ..FieldParams::default()
    }
}

/// Splitting magnitude below which the demo switches to the coalesced
/// waveform limit.
const EP_TOLERANCE: f64 = 1e-6;

/// Eigenvalue branches over Ω3 ∈ [0, omega3_max] at fixed Δ3.
/// Rows of 5: [omega3, re δ+, im δ+, re δ-, im δ-].
pub fn eigen_sweep_impl(
    omega3_max: f64,
    n: usize,
    delta3: f64,
    gamma21_ratio: f64,
) -> Result<Vec<f64>, String> {
    let n = n.clamp(2, 100_000);
    if !(omega3_max > 0.0) {
        return Err("omega3_max must be positive".into());
    }
    let grid: Vec<f64> = (0..n)
        .map(|i| i as f64 * omega3_max / (n - 1) as f64)
        .collect();
    let points = sweep_eigenvalues(&sys_with(gamma21_ratio), &grid, &[delta3])
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(points.len() * 5);
    for p in points {
        out.extend_from_slice(&[
            p.omega3,
            p.delta_plus.re,
            p.delta_plus.im,
            p.delta_minus.re,
            p.delta_minus.im,
        ]);
    }
    Ok(out)
}

/// Coalescence point Ω3 = 2Γ_diff on the Δ3 = 0 line, for the sweep marker.
pub fn ep_omega3_impl(gamma21_ratio: f64) -> Result<f64, String> {
    find_ep(&sys_with(gamma21_ratio), 0.0).map_err(|e| e.to_string())
}

/// |χ(3)| over δ ∈ [-span, span]. Rows of 2: [delta, |chi3|].
pub fn chi3_spectrum_impl(
    omega3: f64,
    delta3: f64,
    span: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    let n = n.clamp(2, 100_000);
    if !(span > 0.0) {
        return Err("span must be positive".into());
    }
    let sys = SystemParams::default();
    let fields = fields_with(omega3, delta3);
    let grid = symmetric_grid(span, n);
    let spec = chi3(
        &grid,
        &sys,
        &fields,
        &DopplerModel::disabled(),
        &ChiOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(n * 2);
    for (d, v) in spec.delta_grid.iter().zip(&spec.values) {
        out.extend_from_slice(&[*d, v.norm()]);
    }
    Ok(out)
}

/// Two-pole G²(τ) over τ ∈ [0, tau_max] (internal 1/Γ41 units), switching
/// to the τ²-limit at coalescence. Rows of 2: [tau, g2].
pub fn g2_waveform_impl(
    omega3: f64,
    delta3: f64,
    tau_max: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    let n = n.clamp(2, 100_000);
    if !(tau_max > 0.0) {
        return Err("tau_max must be positive".into());
    }
    let sys = SystemParams::default();
    let fields = fields_with(omega3, delta3);
    let pair = eigenvalues(&sys, &fields).map_err(|e| e.to_string())?;
    let tau: Vec<f64> = (0..n)
        .map(|i| i as f64 * tau_max / (n - 1) as f64)
        .collect();
    let wf = if pair.splitting_abs() < EP_TOLERANCE {
        ep_limit(&tau, 1.0, sys.gamma_eff(), 1.0)
    } else {
        g2_two_pole(&tau, 1.0, &pair, 1.0)
    };
    let mut out = Vec::with_capacity(n * 2);
    for (t, g) in wf.tau_grid.iter().zip(&wf.g2) {
        out.extend_from_slice(&[*t, *g]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn eigen_sweep(
    omega3_max: f64,
    n: usize,
    delta3: f64,
    gamma21_ratio: f64,
) -> Result<Vec<f64>, JsValue> {
    eigen_sweep_impl(omega3_max, n, delta3, gamma21_ratio).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ep_omega3(gamma21_ratio: f64) -> Result<f64, JsValue> {
    ep_omega3_impl(gamma21_ratio).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn chi3_spectrum(
    omega3: f64,
    delta3: f64,
    span: f64,
    n: usize,
) -> Result<Vec<f64>, JsValue> {
    chi3_spectrum_impl(omega3, delta3, span, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn g2_waveform(
    omega3: f64,
    delta3: f64,
    tau_max: f64,
    n: usize,
) -> Result<Vec<f64>, JsValue> {
    g2_waveform_impl(omega3, delta3, tau_max, n).map_err(|e| JsValue::from_str(&e))
}
