//! Network configurations and the full per-frame simulation pipeline.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datapath::{run_layer_raw, OutputFormat, RawOutput};
use crate::energy::{
    layer_power, voltage_for_precision, OperatingPoint, PowerBreakdown, PowerModel, MAX_FREQUENCY,
    MAX_VOLTAGE, MIN_FREQUENCY, MIN_VOLTAGE,
};
use crate::error::{Error, Result};
use crate::huffman;
use crate::mapper::{LayerSpec, NOMINAL_FREQUENCY};
use crate::quant::{check_bits, maxpool, relu_vec, QTensor};
use crate::stats::SimStats;
use crate::synth::{synth_tensor, Distribution};
use crate::tensorfile;

fn default_frequency() -> f64 {
    NOMINAL_FREQUENCY
}
fn default_seed() -> u64 {
    1
}
fn unit_stride() -> [usize; 2] {
    [1, 1]
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub name: String,
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub layers: Vec<LayerConfig>,
    /// Directory that relative tensor file paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerConfig {
    Conv(ConvConfig),
    Relu,
    MaxPool { window: [usize; 2], stride: [usize; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvConfig {
    pub name: String,
    /// `[channels, height, width]`
    pub input: [usize; 3],
    pub filters: usize,
    pub kernel: [usize; 2],
    /// `[horizontal, vertical]`
    #[serde(default = "unit_stride")]
    pub stride: [usize; 2],
    #[serde(default)]
    pub pad: usize,
    #[serde(default = "one")]
    pub groups: usize,
    pub weight_bits: u8,
    pub image_bits: u8,
    /// Array supply; defaults to the precision lookup.
    #[serde(default)]
    pub voltage: Option<f64>,
    #[serde(default = "yes")]
    pub guarding: bool,
    pub weights: TensorSource,
    #[serde(default)]
    pub image: TensorSource,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensorSource {
    Synthetic {
        zero_fraction: f64,
        #[serde(default)]
        distribution: Distribution,
        #[serde(default)]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
    /// The previous layer's output. With a target, the previous conv picks
    /// its output exponent so the chained tensor's zero fraction lands closest to it.
    Chain {
        #[serde(default)]
        zero_fraction: Option<f64>,
    },
}

impl Default for TensorSource {
    fn default() -> Self {
        TensorSource::Chain {
            zero_fraction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Defaults to the next conv's image width, else 16.
    #[serde(default)]
    pub bits: Option<u8>,
    /// Defaults to automatic selection.
    #[serde(default)]
    pub exponent: Option<i32>,
}

impl ConvConfig {
    pub fn spec(&self, frequency: f64) -> Result<LayerSpec> {
        let [c, h, w] = self.input;
        let mut spec = LayerSpec::conv(c, h, w, self.filters, (self.kernel[0], self.kernel[1]))
            .with_stride(self.stride[0], self.stride[1])
            .with_pad(self.pad)
            .with_groups(self.groups)
            .with_bits(self.weight_bits, self.image_bits)
            .with_guarding(self.guarding);
        spec.frequency = frequency;
        spec.validate()?;
        spec.voltage = match self.voltage {
            Some(v) => v,
            None => voltage_for_precision(self.weight_bits.max(self.image_bits), frequency)?,
        };
        Ok(spec)
    }
}

fn parse_error(location: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.to_string(),
    }
}

fn conv_output_dims(spec: &LayerSpec) -> [usize; 3] {
    [spec.num_filters, spec.out_height(), spec.out_width()]
}

fn pool_dims(dims: [usize; 3], window: [usize; 2], stride: [usize; 2]) -> Option<[usize; 3]> {
    let [c, h, w] = dims;
    if window.contains(&0) || stride.contains(&0) || window[0] > h || window[1] > w {
        return None;
    }
    Some([c, (h - window[0]) / stride[0] + 1, (w - window[1]) / stride[1] + 1])
}

fn layer_name(l: &LayerConfig, i: usize) -> String {
    match l {
        LayerConfig::Conv(c) => c.name.clone(),
        LayerConfig::Relu => format!("relu#{i}"),
        LayerConfig::MaxPool { .. } => format!("maxpool#{i}"),
    }
}

impl NetworkConfig {
    /// Checks operating points, layer geometry and that every shape chains into the next layer.
    pub fn validate(&self) -> Result<()> {
        if !(MIN_FREQUENCY..=MAX_FREQUENCY).contains(&self.frequency) {
            return Err(parse_error(
                "frequency",
                format!("{} Hz outside [12 MHz, 204 MHz]", self.frequency),
            ));
        }
        // Output dims of the last layer and the index that produced them.
        let mut current: Option<([usize; 3], usize)> = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let at = |field: &str| format!("layers[{i}].{field}");
            let chain_err = |from: usize, detail: String| Error::ShapeChain {
                from,
                from_name: layer_name(&self.layers[from], from),
                to: i,
                to_name: layer_name(layer, i),
                detail,
            };
            match layer {
                LayerConfig::Conv(c) => {
                    let spec = c.spec(self.frequency).map_err(|e| parse_error(at("geometry"), e))?;
                    if let Some(v) = c.voltage {
                        if !(MIN_VOLTAGE..=MAX_VOLTAGE).contains(&v) {
                            return Err(parse_error(at("voltage"), format!("{v} V outside [0.55, 1.1]")));
                        }
                    }
                    if let Some(b) = c.output.bits {
                        check_bits(b as u32).map_err(|e| parse_error(at("output.bits"), e))?;
                    }
                    if let TensorSource::Synthetic { zero_fraction, .. } = &c.weights {
                        if !(0.0..=1.0).contains(zero_fraction) {
                            return Err(parse_error(at("weights.zero_fraction"), "outside [0, 1]"));
                        }
                    }
                    match (&c.image, current) {
                        (TensorSource::Chain { .. }, None) => {
                            return Err(parse_error(at("image"), "first conv layer has no input to chain from"))
                        }
                        (TensorSource::Chain { zero_fraction: Some(z) }, _) if !(0.0..=1.0).contains(z) => {
                            return Err(parse_error(at("image.zero_fraction"), "outside [0, 1]"))
                        }
                        (TensorSource::Synthetic { zero_fraction, .. }, _) if !(0.0..=1.0).contains(zero_fraction) => {
                            return Err(parse_error(at("image.zero_fraction"), "outside [0, 1]"))
                        }
                        _ => {}
                    }
                    if let Some((dims, from)) = current {
                        if dims != c.input {
                            return Err(chain_err(
                                from,
                                format!("produces {dims:?} but the next conv expects {:?}", c.input),
                            ));
                        }
                    }
                    current = Some((conv_output_dims(&spec), i));
                }
                LayerConfig::Relu => {
                    if current.is_none() {
                        return Err(parse_error(at("type"), "relu needs an input layer"));
                    }
                }
                LayerConfig::MaxPool { window, stride } => {
                    let Some((dims, from)) = current else {
                        return Err(parse_error(at("type"), "max_pool needs an input layer"));
                    };
                    let out = pool_dims(dims, *window, *stride).ok_or_else(|| {
                        chain_err(from, format!("pool {window:?}/{stride:?} does not fit {dims:?}"))
                    })?;
                    current = Some((out, i));
                }
            }
        }
        Ok(())
    }

    pub fn conv_layers(&self) -> impl Iterator<Item = &ConvConfig> {
        self.layers.iter().filter_map(|l| match l {
            LayerConfig::Conv(c) => Some(c),
            _ => None,
        })
    }

    fn conv_mut(&mut self, number: usize) -> Result<&mut ConvConfig> {
        self.layers
            .iter_mut()
            .filter_map(|l| match l {
                LayerConfig::Conv(c) => Some(c),
                _ => None,
            })
            .nth(number.wrapping_sub(1))
            .ok_or_else(|| Error::Range(format!("no conv layer number {number}")))
    }

    /// Sets conv layer `number` (1-based) to the given operand widths.
    pub fn override_bits(&mut self, number: usize, weight_bits: u8, image_bits: u8) -> Result<()> {
        check_bits(weight_bits as u32)?;
        check_bits(image_bits as u32)?;
        let c = self.conv_mut(number)?;
        c.weight_bits = weight_bits;
        c.image_bits = image_bits;
        // The previous conv's default output width follows the new image width.
        Ok(())
    }

    pub fn override_voltage(&mut self, number: usize, voltage: f64) -> Result<()> {
        if !(MIN_VOLTAGE..=MAX_VOLTAGE).contains(&voltage) {
            return Err(Error::Range(format!("{voltage} V outside [0.55, 1.1]")));
        }
        self.conv_mut(number)?.voltage = Some(voltage);
        Ok(())
    }

    pub fn set_guarding(&mut self, on: bool) {
        for l in &mut self.layers {
            if let LayerConfig::Conv(c) = l {
                c.guarding = on;
            }
        }
    }
}

/// Parses and validates a JSON network description.
pub fn parse_config(text: &str) -> Result<NetworkConfig> {
    let cfg: NetworkConfig = serde_json::from_str(text).map_err(|e| {
        parse_error(format!("line {} column {}", e.line(), e.column()), e)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<NetworkConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_error(path.display().to_string(), e))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

/// Raw and Huffman-coded size of one DMA stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamIo {
    pub words: u64,
    pub raw_bytes: u64,
    pub compressed_bytes: u64,
    pub entropy_bits: f64,
}

impl StreamIo {
    fn of(t: &QTensor) -> Result<Self> {
        let s = huffman::encode(&t.data, t.bits)?;
        Ok(StreamIo {
            words: t.data.len() as u64,
            raw_bytes: s.raw_bytes() as u64,
            compressed_bytes: s.compressed_bytes() as u64,
            entropy_bits: crate::oracle::empirical_entropy(&t.data, t.bits),
        })
    }

    pub fn ratio(&self) -> f64 {
        crate::stats::ratio(self.raw_bytes, self.compressed_bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub index: usize,
    pub name: String,
    pub weight_bits: u8,
    pub image_bits: u8,
    pub weight_zero_fraction: f64,
    pub image_zero_fraction: f64,
    pub voltage: f64,
    pub voltage_feasible: bool,
    pub guarding: bool,
    pub dense_macs: u64,
    pub output_exponent: i32,
    pub stats: SimStats,
    pub mac_efficiency: f64,
    pub weight_io: StreamIo,
    pub image_io: StreamIo,
    pub power: PowerBreakdown,
}

impl LayerReport {
    pub fn total_cycles(&self) -> u64 {
        self.stats.total_cycles()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub cycles: u64,
    pub stall_cycles: u64,
    pub dense_macs: u64,
    pub mac_efficiency: f64,
    pub fps: f64,
    pub energy_mj: f64,
    pub average_power_mw: f64,
    pub real_tops_per_watt: f64,
    pub raw_io_bytes: u64,
    pub compressed_io_bytes: u64,
    pub io_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub network: String,
    pub frequency: f64,
    pub seed: u64,
    pub model: PowerModel,
    pub layers: Vec<LayerReport>,
    pub totals: Totals,
}

impl Report {
    /// Aggregates per-layer values into network totals.
    pub fn new(network: String, frequency: f64, seed: u64, model: PowerModel, layers: Vec<LayerReport>) -> Self {
        let mut t = Totals::default();
        let mut slots = 0u64;
        for l in &layers {
            t.cycles += l.total_cycles();
            t.stall_cycles += l.stats.stall_cycles;
            t.dense_macs += l.dense_macs;
            slots += l.stats.issued_slots();
            t.energy_mj += l.power.total * l.total_cycles() as f64 / frequency;
            t.raw_io_bytes += l.weight_io.raw_bytes + l.image_io.raw_bytes;
            t.compressed_io_bytes += l.weight_io.compressed_bytes + l.image_io.compressed_bytes;
        }
        if t.cycles > 0 {
            t.fps = frequency / t.cycles as f64;
            let time = t.cycles as f64 / frequency;
            t.average_power_mw = t.energy_mj / time;
            t.mac_efficiency = t.dense_macs as f64 / slots as f64;
            t.real_tops_per_watt = 2.0 * t.dense_macs as f64 * t.fps / (t.average_power_mw * 1e-3) / 1e12;
        }
        t.io_ratio = crate::stats::ratio(t.raw_io_bytes, t.compressed_io_bytes);
        Report {
            network,
            frequency,
            seed,
            model,
            layers,
            totals: t,
        }
    }
}

/// Seed for a synthetic source with no explicit seed.
fn derived_seed(network_seed: u64, conv_number: usize, stream: u64) -> u64 {
    network_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(conv_number as u64 * 2 + stream)
}

fn load_tensor(
    src: &TensorSource,
    dims: &[usize],
    bits: u8,
    seed: u64,
    base: Option<&Path>,
) -> Result<QTensor> {
    match src {
        TensorSource::Synthetic {
            zero_fraction,
            distribution,
            seed: s,
        } => synth_tensor(dims, bits, *zero_fraction, s.unwrap_or(seed), *distribution),
        TensorSource::File { path } => {
            let full = match base {
                Some(b) if path.is_relative() => b.join(path),
                _ => path.clone(),
            };
            let file = std::fs::File::open(&full)
                .map_err(|e| Error::TensorFile(format!("{}: {e}", full.display())))?;
            let t = tensorfile::read(std::io::BufReader::new(file))?;
            if t.dims != dims || t.bits != bits {
                return Err(Error::Shape(format!(
                    "{} holds {:?} at {} bits, layer needs {:?} at {} bits",
                    full.display(),
                    t.dims,
                    t.bits,
                    dims,
                    bits
                )));
            }
            Ok(t)
        }
        TensorSource::Chain { .. } => Err(Error::Shape("chained tensor requested without a previous layer".into())),
    }
}

enum PostOp {
    Relu,
    Pool([usize; 2], [usize; 2]),
}

fn apply_post(t: QTensor, ops: &[PostOp]) -> Result<QTensor> {
    ops.iter().try_fold(t, |t, op| match op {
        PostOp::Relu => Ok(relu_vec(&t)),
        PostOp::Pool(w, s) => maxpool(&t, (w[0], w[1]), (s[0], s[1])),
    })
}

/// Smallest right shift that narrows every accumulation without clipping.
fn lossless_shift(raw: &RawOutput, bits: u8) -> u32 {
    let peak = raw.data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let hi = if bits == 1 { 1u64 } else { (1u64 << (bits - 1)) - 1 };
    (0..63).find(|&s| (peak + (1u64 << s) / 2) >> s <= hi).unwrap_or(63)
}

/// Output format and narrowed, post-processed tensor for the next layer.
fn choose_output(
    raw: &RawOutput,
    bits: u8,
    exponent: Option<i32>,
    target_zero: Option<f64>,
    post: &[PostOp],
) -> Result<(OutputFormat, QTensor)> {
    let narrow = |shift: u32| -> Result<(OutputFormat, QTensor)> {
        let fmt = OutputFormat {
            bits,
            exponent: raw.exponent_sum + shift as i32,
        };
        let t = apply_post(raw.requantize(fmt)?, post)?;
        Ok((fmt, t))
    };
    if let Some(e) = exponent {
        let fmt = OutputFormat { bits, exponent: e };
        return Ok((fmt, apply_post(raw.requantize(fmt)?, post)?));
    }
    let base = lossless_shift(raw, bits);
    let Some(target) = target_zero else {
        return narrow(base);
    };
    let mut best: Option<(f64, OutputFormat, QTensor)> = None;
    for shift in 0..=base + 24 {
        let (fmt, t) = narrow(shift)?;
        let gap = (t.zero_fraction() - target).abs();
        if best.as_ref().is_none_or(|b| gap < b.0) {
            best = Some((gap, fmt, t));
        }
    }
    let (_, fmt, t) = best.expect("at least one shift is tried");
    Ok((fmt, t))
}

/// Simulates one conv layer on given operands and evaluates its power.
pub fn simulate_conv(
    index: usize,
    name: &str,
    spec: &LayerSpec,
    weights: &QTensor,
    image: &QTensor,
    model: &PowerModel,
) -> Result<(LayerReport, RawOutput)> {
    let weight_io = StreamIo::of(weights)?;
    let image_io = StreamIo::of(image)?;
    let out_words = (spec.num_filters * spec.out_height() * spec.out_width()) as u64;
    let dma_words = weight_io.words + image_io.words + out_words;
    let (raw, mut stats) = run_layer_raw(spec, weights, image, index, dma_words)?;
    stats.dma_raw_bytes = weight_io.raw_bytes + image_io.raw_bytes;
    stats.dma_compressed_bytes = weight_io.compressed_bytes + image_io.compressed_bytes;
    let op = OperatingPoint::for_layer(spec);
    let report = LayerReport {
        index,
        name: name.to_string(),
        weight_bits: spec.weight_bits,
        image_bits: spec.image_bits,
        weight_zero_fraction: weights.zero_fraction(),
        image_zero_fraction: image.zero_fraction(),
        voltage: spec.voltage,
        voltage_feasible: op.timing_feasible(),
        guarding: spec.guarding,
        dense_macs: spec.dense_macs(),
        output_exponent: 0,
        stats,
        mac_efficiency: stats.mac_efficiency(),
        weight_io,
        image_io,
        power: layer_power(&stats, &op, model),
    };
    Ok((report, raw))
}

/// Runs every conv layer of a frame in order, chaining outputs through ReLU and pooling.
pub fn run_network(cfg: &NetworkConfig, model: &PowerModel) -> Result<Report> {
    cfg.validate()?;
    let mut layers = Vec::new();
    let mut chained: Option<QTensor> = None;
    let mut conv_number = 0;
    let base = cfg.base_dir.as_deref();

    for (i, layer) in cfg.layers.iter().enumerate() {
        let LayerConfig::Conv(c) = layer else { continue };
        conv_number += 1;
        let mut run = || -> Result<(LayerReport, QTensor)> {
            let spec = c.spec(cfg.frequency)?;
            let weights = load_tensor(
                &c.weights,
                &spec.weight_dims(),
                spec.weight_bits,
                derived_seed(cfg.seed, conv_number, 0),
                base,
            )?;
            let image = match (&c.image, chained.take()) {
                (TensorSource::Chain { .. }, Some(t)) => {
                    if t.bits != spec.image_bits {
                        return Err(Error::Shape(format!(
                            "chained input has {} bits, layer expects {}",
                            t.bits, spec.image_bits
                        )));
                    }
                    t
                }
                (src, _) => load_tensor(
                    src,
                    &spec.image_dims(),
                    spec.image_bits,
                    derived_seed(cfg.seed, conv_number, 1),
                    base,
                )?,
            };
            let (mut report, raw) = simulate_conv(i, &c.name, &spec, &weights, &image, model)?;

            // Post-ops up to the next conv, and what that conv wants to receive.
            let mut post = Vec::new();
            let mut next: Option<&ConvConfig> = None;
            for l in &cfg.layers[i + 1..] {
                match l {
                    LayerConfig::Relu => post.push(PostOp::Relu),
                    LayerConfig::MaxPool { window, stride } => post.push(PostOp::Pool(*window, *stride)),
                    LayerConfig::Conv(n) => {
                        next = Some(n);
                        break;
                    }
                }
            }
            let bits = c
                .output
                .bits
                .or(next.map(|n| n.image_bits))
                .unwrap_or(16);
            let target = match next.map(|n| &n.image) {
                Some(TensorSource::Chain { zero_fraction }) => *zero_fraction,
                _ => None,
            };
            let (fmt, out) = choose_output(&raw, bits, c.output.exponent, target, &post)?;
            report.output_exponent = fmt.exponent;
            Ok((report, out))
        };
        let (report, out) = run().map_err(|e| e.in_layer(i, &c.name))?;
        layers.push(report);
        chained = Some(out);
    }
    Ok(Report::new(cfg.name.clone(), cfg.frequency, cfg.seed, *model, layers))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> String {
        r#"{
          "name": "tiny",
          "layers": [
            {"type": "conv", "name": "c1", "input": [1, 12, 12], "filters": 4, "kernel": [3, 3],
             "weight_bits": 4, "image_bits": 4,
             "weights": {"source": "synthetic", "zero_fraction": 0.2},
             "image": {"source": "synthetic", "zero_fraction": 0.5}},
            {"type": "relu"},
            {"type": "max_pool", "window": [2, 2], "stride": [2, 2]},
            {"type": "conv", "name": "c2", "input": [4, 5, 5], "filters": 8, "kernel": [3, 3],
             "weight_bits": 4, "image_bits": 6,
             "weights": {"source": "synthetic", "zero_fraction": 0.2},
             "image": {"source": "chain", "zero_fraction": 0.6}}
          ]
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_runs() {
        let cfg = parse_config(&tiny()).unwrap();
        assert_eq!(cfg.conv_layers().count(), 2);
        let r = run_network(&cfg, &PowerModel::default()).unwrap();
        assert_eq!(r.layers.len(), 2);
        assert_eq!(r.layers[1].image_bits, 6);
        assert_eq!(r.totals.cycles, r.layers.iter().map(|l| l.total_cycles()).sum::<u64>());
        assert_eq!(run_network(&cfg, &PowerModel::default()).unwrap(), r);
    }

    #[test]
    fn chain_mismatch_names_both_layers() {
        let text = tiny().replace("[4, 5, 5]", "[3, 5, 5]");
        match parse_config(&text) {
            Err(Error::ShapeChain { from, to, to_name, .. }) => {
                assert_eq!((from, to), (2, 3));
                assert_eq!(to_name, "c2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_location() {
        match parse_config("{\"name\": \"x\",\n \"layers\": [ }") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
        match parse_config(&tiny().replace("\"filters\": 8", "\"filters\": 8, \"bogus\": 1")) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("bogus")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn first_layer_cannot_chain() {
        let text = tiny().replacen(r#""image": {"source": "synthetic", "zero_fraction": 0.5}"#, r#""image": {"source": "chain"}"#, 1);
        assert!(matches!(parse_config(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_network_has_zero_totals() {
        let cfg = parse_config(r#"{"name": "empty", "layers": []}"#).unwrap();
        let r = run_network(&cfg, &PowerModel::default()).unwrap();
        assert_eq!(r.totals, Totals { io_ratio: r.totals.io_ratio, ..Default::default() });
    }
}
