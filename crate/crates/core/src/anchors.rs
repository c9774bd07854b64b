//! Calibration anchors described as single-layer scenarios.
//!
//! Each scenario is simulated on synthetic data to obtain its activity
//! counts, which are then paired with the measured power.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::energy::{calibrate, Anchor, Calibration, OperatingPoint, PowerModel};
use crate::error::{Error, Result};
use crate::mapper::NOMINAL_FREQUENCY;
use crate::network::{simulate_conv, ConvConfig, TensorSource};
use crate::stats::SimStats;
use crate::synth::synth_tensor;

fn default_frequency() -> f64 {
    NOMINAL_FREQUENCY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorScenario {
    pub name: String,
    pub layer: ConvConfig,
    pub measured_mw: f64,
    #[serde(default)]
    pub exact: bool,
    /// Evaluate the layer's counts at this width instead of its operand width.
    #[serde(default)]
    pub eval_bits: Option<u8>,
    /// Rows sharing a group are left out together in leave-one-out validation.
    #[serde(default)]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorSet {
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    #[serde(default)]
    pub seed: u64,
    pub anchors: Vec<AnchorScenario>,
}

pub fn parse_anchor_set(text: &str) -> Result<AnchorSet> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn synthetic(src: &TensorSource, dims: &[usize], bits: u8, seed: u64) -> Result<crate::QTensor> {
    match src {
        TensorSource::Synthetic {
            zero_fraction,
            distribution,
            seed: s,
        } => synth_tensor(dims, bits, *zero_fraction, s.unwrap_or(seed), *distribution),
        _ => Err(Error::Parse {
            location: "anchor layer".into(),
            message: "anchor layers need synthetic weights and image".into(),
        }),
    }
}

/// Simulates one scenario layer and returns its counts.
pub fn scenario_stats(layer: &ConvConfig, frequency: f64, seed: u64) -> Result<SimStats> {
    let spec = layer.spec(frequency)?;
    let w = synthetic(&layer.weights, &spec.weight_dims(), spec.weight_bits, seed)?;
    let i = synthetic(&layer.image, &spec.image_dims(), spec.image_bits, seed ^ 1)?;
    let (r, _) = simulate_conv(0, &layer.name, &spec, &w, &i, &PowerModel::default())?;
    Ok(r.stats)
}

/// Simulates every scenario, sharing runs between scenarios with identical layers.
pub fn simulate_anchors(set: &AnchorSet) -> Result<Vec<Anchor>> {
    let mut cache: HashMap<String, SimStats> = HashMap::new();
    set.anchors
        .iter()
        .map(|a| {
            let key = serde_json::to_string(&a.layer).expect("configs serialize");
            let stats = match cache.get(&key) {
                Some(s) => *s,
                None => {
                    let s = scenario_stats(&a.layer, set.frequency, set.seed)
                        .map_err(|e| e.in_layer(0, &a.name))?;
                    cache.insert(key, s);
                    s
                }
            };
            let spec = a.layer.spec(set.frequency)?;
            let mut op = OperatingPoint::for_layer(&spec);
            if let Some(b) = a.eval_bits {
                op.bits = b;
            }
            Ok(Anchor {
                name: a.name.clone(),
                stats,
                op,
                measured_mw: a.measured_mw,
                exact: a.exact,
            })
        })
        .collect()
}

/// Prediction for one held-out group from a model fitted without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldOut {
    pub name: String,
    pub predicted_mw: f64,
    pub measured_mw: f64,
    pub relative_error: f64,
}

/// Refits without each named row (and its group) and predicts it.
///
/// Exact anchors are never held out.
pub fn leave_one_out(set: &AnchorSet, anchors: &[Anchor], names: &[&str]) -> Result<Vec<HoldOut>> {
    names
        .iter()
        .map(|&name| {
            let pos = set
                .anchors
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| Error::Range(format!("no anchor named {name}")))?;
            let group = set.anchors[pos].group.as_deref();
            let kept: Vec<Anchor> = set
                .anchors
                .iter()
                .zip(anchors)
                .filter(|(s, _)| s.name != name && (group.is_none() || s.group.as_deref() != group))
                .map(|(_, a)| a.clone())
                .collect();
            let Calibration { model, .. } = calibrate(&kept)?;
            let a = &anchors[pos];
            let p = crate::energy::layer_power(&a.stats, &a.op, &model).total;
            Ok(HoldOut {
                name: name.to_string(),
                predicted_mw: p,
                measured_mw: a.measured_mw,
                relative_error: (p - a.measured_mw) / a.measured_mw,
            })
        })
        .collect()
}
