//! Browser bindings: each call returns a JSON string the page renders.

use pscnn::datapath::{run_layer, OutputFormat};
use pscnn::energy::{layer_power, OperatingPoint, PowerModel};
use pscnn::mapper::{fetch_reduction_vs_1d, schedule_tile, tile_layer, LayerSpec};
use pscnn::oracle::empirical_entropy;
use pscnn::synth::{synth_tensor, Distribution};
use pscnn::{huffman, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js(r: Result<serde_json::Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// Simulates a small 3x3 layer with synthetic operands and prices it with the default model.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn power_breakdown(
    weight_bits: u8,
    image_bits: u8,
    weight_zeros: f64,
    image_zeros: f64,
    voltage: f64,
    frequency_mhz: f64,
    guarding: bool,
) -> std::result::Result<String, JsError> {
    to_js(power_inner(
        weight_bits,
        image_bits,
        weight_zeros,
        image_zeros,
        voltage,
        frequency_mhz * 1e6,
        guarding,
    ))
}

fn power_inner(
    wb: u8,
    ib: u8,
    zw: f64,
    zp: f64,
    voltage: f64,
    frequency: f64,
    guarding: bool,
) -> Result<serde_json::Value> {
    let spec = LayerSpec::conv(16, 18, 34, 32, (3, 3))
        .with_bits(wb, ib)
        .with_guarding(guarding);
    let w = synth_tensor(&spec.weight_dims(), wb, zw, 1, Distribution::Laplace)?;
    let i = synth_tensor(&spec.image_dims(), ib, zp, 2, Distribution::Uniform)?;
    let run = run_layer(&spec, &w, &i, OutputFormat { bits: 16, exponent: 0 })?;
    let op = OperatingPoint::new(wb.max(ib), voltage, frequency);
    let p = layer_power(&run.stats, &op, &PowerModel::default());
    Ok(json!({
        "power": p,
        "stats": run.stats,
        "voltage_feasible": op.timing_feasible(),
        "required_voltage": op.required_voltage().ok(),
    }))
}

/// Cycle trace of the first tile of a single-channel layer plus whole-layer fetch ratios.
#[wasm_bindgen]
pub fn tile_trace(kernel: usize, stride: usize, width: usize) -> std::result::Result<String, JsError> {
    to_js(trace_inner(kernel, stride, width))
}

fn trace_inner(kernel: usize, stride: usize, width: usize) -> Result<serde_json::Value> {
    let spec = LayerSpec::conv(1, kernel, width, 16, (kernel, kernel)).with_stride(stride, 1);
    spec.validate()?;
    let tile = tile_layer(&spec)?.tiles[0];
    let sched = schedule_tile(&spec, tile);
    let cycles: Vec<_> = sched
        .events
        .iter()
        .map(|e| {
            json!({
                "pixels": e.pixel_fetches.as_slice(),
                "weights": e.weight_fetches.len(),
                "shift": e.shift,
                "tap": [e.targets.kh, e.targets.kw],
            })
        })
        .collect();
    let red = fetch_reduction_vs_1d(&spec)?;
    Ok(json!({
        "columns": tile.cols,
        "cycles": sched.cycles(),
        "fetches": sched.word_fetches(),
        // A 1D array fetches both operands for every MAC.
        "naive_fetches": 2 * tile.cols * tile.filters * kernel * kernel,
        "reduction": red.combined,
        "pixel_reduction": red.pixels_only,
        "trace": cycles,
    }))
}

/// Huffman-codes a synthetic stream and compares against its empirical entropy.
#[wasm_bindgen]
pub fn huffman_ratio(bits: u8, zero_fraction: f64, words: usize, seed: u64) -> std::result::Result<String, JsError> {
    to_js(huffman_inner(bits, zero_fraction, words, seed))
}

fn huffman_inner(bits: u8, z: f64, n: usize, seed: u64) -> Result<serde_json::Value> {
    let t = synth_tensor(&[n], bits, z, seed, Distribution::Uniform)?;
    let s = huffman::encode(&t.data, bits)?;
    let h = empirical_entropy(&t.data, bits);
    Ok(json!({
        "entropy_bits": h,
        "bound": if h > 0.0 { bits as f64 / h } else { f64::INFINITY },
        "payload_ratio": s.payload_ratio(),
        "ratio": s.ratio(),
        "raw_bytes": s.raw_bytes(),
        "compressed_bytes": s.compressed_bytes(),
        "table_entries": s.table.len(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calls_return_json() {
        let p: serde_json::Value = serde_json::from_str(&power_breakdown(7, 7, 0.2, 0.8, 0.9, 204.0, true).unwrap()).unwrap();
        assert!(p["power"]["total"].as_f64().unwrap() > 0.7);
        let t: serde_json::Value = serde_json::from_str(&tile_trace(11, 4, 227).unwrap()).unwrap();
        assert_eq!(t["fetches"], 2222);
        assert_eq!(t["naive_fetches"], 61952);
        let h: serde_json::Value = serde_json::from_str(&huffman_ratio(7, 0.89, 4096, 1).unwrap()).unwrap();
        assert!(h["ratio"].as_f64().unwrap() > 2.0);
    }
}
