//! Browser bindings. Every function takes plain numbers and returns a JSON
//! string, so the page needs no generated type glue beyond `wasm-bindgen`.

use serde_json::json;
use stochres_core::capacity::{eigentask_decomposition, gram_matrices, ipc_probability_rep, ipc_spectral, Readout, DEFAULT_RANK_TOLERANCE};
use stochres_core::experiments::{noisy_shift_register, noisy_shift_register_ipc, scan_system_size, switching_family, Averaging, TailShape};
use stochres_core::quadrature::gauss_legendre;
use stochres_core::readout::{SignalMatrix, SignalMode};
use stochres_core::reservoir::InputMeasure;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Exponential family with rate `beta` and the polynomial family of matched
/// half-width, both on [0, 1].
#[wasm_bindgen]
pub fn switching_json(k: usize, beta: f64, points: usize) -> Result<String, JsValue> {
    let shape = TailShape::Exponential { beta };
    let exp = switching_family(shape, k, [0.0, 1.0], points).map_err(js_err)?;
    let poly = switching_family(shape.matched_polynomial(), k, [0.0, 1.0], points).map_err(js_err)?;
    Ok(json!({
        "grid": exp.grid,
        "exponential": {"signals": exp.signals, "peaks": exp.peaks, "min_peak": exp.min_peak()},
        "polynomial": {"signals": poly.signals, "peaks": poly.peaks, "min_peak": poly.min_peak()},
    })
    .to_string())
}

/// IPC of the noisy shift register for n = 2..=n_max under +-1 inputs.
#[wasm_bindgen]
pub fn ipc_scan_json(lambda: f64, n_max: usize) -> Result<String, JsValue> {
    let ns: Vec<usize> = (2..=n_max.clamp(4, 10)).collect();
    let m = InputMeasure::binary(0);
    let curve = scan_system_size(&noisy_shift_register, &ns, lambda, &m, Averaging::Enumerated { window: 0 }).map_err(js_err)?;
    let analytic: Vec<f64> = ns.iter().map(|&n| noisy_shift_register_ipc(n, lambda)).collect();
    Ok(json!({
        "n": curve.n,
        "ipc": curve.ipc,
        "analytic": analytic,
        "slope": curve.exponential_fit.slope,
        "slope_stderr": curve.exponential_fit.slope_stderr,
        "subexponential_consistent": curve.subexponential_consistent,
    })
    .to_string())
}

/// One bit with `p1(u) = (1 + gain u) / 2`, `u` uniform on [-1, 1]; read
/// out with `shots` samples per step (0 means noiseless).
#[wasm_bindgen]
pub fn single_bit_json(gain: f64, shots: u32) -> Result<String, JsValue> {
    if !(0.0..=1.0).contains(&gain) {
        return Err(js_err("gain must lie in [0, 1]"));
    }
    let (x, w) = gauss_legendre(64);
    let cols = vec![x.iter().map(|u| (1.0 - gain * u) / 2.0).collect(), x.iter().map(|u| (1.0 + gain * u) / 2.0).collect()];
    let signals = SignalMatrix::from_columns(1, SignalMode::ExactProbability, vec![0, 1], &cols)
        .and_then(|s| s.with_weights(w))
        .map_err(js_err)?;
    let readout = match shots {
        0 => Readout::Noiseless,
        1 => Readout::SingleShot,
        s => Readout::Shots(s as u64),
    };
    let g = gram_matrices(&signals, readout).map_err(js_err)?;
    let decomp = eigentask_decomposition(&g.g1, &g.g2, DEFAULT_RANK_TOLERANCE).map_err(js_err)?;
    let spectral = ipc_spectral(&decomp);
    let trace = ipc_probability_rep(&signals).map_err(js_err)?;
    Ok(json!({
        "sigma_sq": decomp.sigma_sq,
        "ipc": spectral.ipc,
        "single_shot_trace_ipc": trace.ipc,
        "retained_rank": decomp.retained_rank,
    })
    .to_string())
}
