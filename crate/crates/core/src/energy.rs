//! Two-domain power model.
//!
//! The fixed domain (memories, control, vector units, DMA) runs at nominal
//! supply and costs energy per cycle plus per SRAM access. The MAC array sits
//! in a scalable domain whose switching energy scales linearly with operand
//! width and quadratically with its supply:
//!
//! ```text
//! P = P_leak
//!   + f * c_fixed
//!   + f * c_sram * (issued words/cycle / 32) * (1 - g_sram * suppressed fraction)
//!   + f * c_sram * (flag bits/cycle / 16) / 32
//!   + f * c_mac  * (bits / 16) * (V / 1.1)^2 * (active slots / 256 cycles) * (1 - g_mac * guarded fraction)
//! ```
//!
//! `f` is in MHz and the `c_*` coefficients in mW/MHz. The guard shares
//! `g_*` are the parts of each term that guarding actually removes.
//! Everything except the leakage is linear in the coefficients, so the model
//! is fitted by constrained linear least squares on relative error.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::{LayerSpec, ARRAY_SLOTS, NOMINAL_FREQUENCY, NOMINAL_VOLTAGE};
use crate::stats::SimStats;

pub const LEAKAGE_MW: f64 = 0.7;
pub const MIN_VOLTAGE: f64 = 0.55;
pub const MAX_VOLTAGE: f64 = 1.1;
pub const MIN_FREQUENCY: f64 = 12e6;
pub const MAX_FREQUENCY: f64 = 204e6;
/// Words per cycle that `c_sram` is quoted at: 16 pixels + 16 weights.
pub const REFERENCE_WORDS_PER_CYCLE: f64 = 32.0;
/// A flag bit costs this fraction of a 16-bit word access.
const FLAG_BIT_COST: f64 = 1.0 / 16.0;

/// Supply needed by the MAC array at 204 MHz, by operand width.
const VOLTAGE_ANCHORS: [(f64, f64); 4] = [(1.0, 0.8), (4.0, 0.8), (8.0, 0.9), (16.0, 1.1)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Effective width: the wider of the two operands.
    pub bits: u8,
    pub voltage: f64,
    pub frequency: f64,
}

impl OperatingPoint {
    pub fn new(bits: u8, voltage: f64, frequency: f64) -> Self {
        OperatingPoint {
            bits,
            voltage,
            frequency,
        }
    }

    pub fn for_layer(spec: &LayerSpec) -> Self {
        OperatingPoint {
            bits: spec.weight_bits.max(spec.image_bits),
            voltage: spec.voltage,
            frequency: spec.frequency,
        }
    }

    /// The minimum array supply for this width and clock; errors outside the modeled ranges.
    pub fn required_voltage(&self) -> Result<f64> {
        voltage_for_precision(self.bits, self.frequency)
    }

    /// Whether the supply meets the modeled timing requirement.
    pub fn timing_feasible(&self) -> bool {
        self.required_voltage()
            .map(|v| self.voltage + 1e-9 >= v)
            .unwrap_or(false)
    }
}

/// Array supply needed at `bits` and `frequency`.
///
/// Piecewise-linear in bits over the 204 MHz anchors, then scaled linearly
/// with frequency toward the 0.55 V floor.
pub fn voltage_for_precision(bits: u8, frequency: f64) -> Result<f64> {
    if !(1..=16).contains(&bits) {
        return Err(Error::Range(format!("bit width {bits} outside [1, 16]")));
    }
    if !(MIN_FREQUENCY..=MAX_FREQUENCY).contains(&frequency) {
        return Err(Error::Range(format!(
            "frequency {frequency} Hz outside [12 MHz, 204 MHz]"
        )));
    }
    let b = bits as f64;
    let at_nominal = VOLTAGE_ANCHORS
        .windows(2)
        .find(|w| b <= w[1].0)
        .map(|w| {
            let ((b0, v0), (b1, v1)) = (w[0], w[1]);
            v0 + (v1 - v0) * (b - b0) / (b1 - b0)
        })
        .unwrap_or(MAX_VOLTAGE);
    let scaled = MIN_VOLTAGE + (at_nominal - MIN_VOLTAGE) * frequency / NOMINAL_FREQUENCY;
    Ok(scaled.clamp(MIN_VOLTAGE, MAX_VOLTAGE))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_leak_mw: f64,
    /// mW/MHz of control, vector units, clocking and DMA.
    pub c_fixed: f64,
    /// mW/MHz of SRAM traffic at 32 words per cycle.
    pub c_sram: f64,
    /// mW/MHz of the fully active array at 16 bits and 1.1 V.
    pub c_mac: f64,
    /// Exponent of the width scaling; 1 is linear.
    pub activity_slope: f64,
    pub guard_sram_share: f64,
    pub guard_mac_share: f64,
}

impl Default for PowerModel {
    /// Coefficients fitted to the bundled anchor set (`configs/anchors.json`).
    fn default() -> Self {
        PowerModel {
            p_leak_mw: LEAKAGE_MW,
            c_fixed: 0.0,
            c_sram: 0.24191046720312226,
            c_mac: 1.506715505778395,
            activity_slope: 1.0,
            guard_sram_share: 1.0,
            guard_mac_share: 0.5737764731851188,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub leakage: f64,
    pub fixed: f64,
    pub sram: f64,
    pub mac_array: f64,
    pub total: f64,
    pub real_tops_per_watt: f64,
}

/// Per-cycle activity factors the model multiplies its coefficients with.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Activity {
    sram_rate: f64,
    sram_suppressed: f64,
    flag_rate: f64,
    mac_scale: f64,
    mac_guarded: f64,
}

impl Activity {
    fn of(stats: &SimStats, op: &OperatingPoint, slope: f64) -> Self {
        let cycles = stats.total_cycles().max(1) as f64;
        let suppressed = stats.suppressed_words() as f64;
        let issued = (stats.sram_reads + stats.sram_writes) as f64 + suppressed;
        let active = (stats.executed_macs + stats.guarded_macs) as f64;
        Activity {
            sram_rate: issued / cycles / REFERENCE_WORDS_PER_CYCLE,
            sram_suppressed: if issued > 0.0 { suppressed / issued } else { 0.0 },
            flag_rate: stats.flag_bits as f64 / cycles * FLAG_BIT_COST / REFERENCE_WORDS_PER_CYCLE,
            mac_scale: (op.bits as f64 / 16.0).powf(slope)
                * (op.voltage / NOMINAL_VOLTAGE).powi(2)
                * active
                / (ARRAY_SLOTS as f64 * cycles),
            mac_guarded: if active > 0.0 {
                stats.guarded_macs as f64 / active
            } else {
                0.0
            },
        }
    }

    /// Row of the linear model in `(c_fixed, c_sram, c_mac, c_sram*g_sram, c_mac*g_mac)`, per MHz.
    fn design_row(&self) -> [f64; 5] {
        [
            1.0,
            self.sram_rate + self.flag_rate,
            self.mac_scale,
            -self.sram_rate * self.sram_suppressed,
            -self.mac_scale * self.mac_guarded,
        ]
    }
}

/// Delivered operations per second per watt, counting 2 ops per dense MAC.
fn real_tops_per_watt(stats: &SimStats, frequency: f64, total_mw: f64) -> f64 {
    let cycles = stats.total_cycles();
    if cycles == 0 || frequency <= 0.0 || total_mw <= 0.0 {
        return 0.0;
    }
    let ops_per_s = 2.0 * stats.useful_macs as f64 * frequency / cycles as f64;
    ops_per_s / (total_mw * 1e-3) / 1e12
}

pub fn layer_power(stats: &SimStats, op: &OperatingPoint, model: &PowerModel) -> PowerBreakdown {
    let f = op.frequency / 1e6;
    let a = Activity::of(stats, op, model.activity_slope);
    let leakage = model.p_leak_mw;
    let fixed = f * model.c_fixed;
    let sram = f
        * model.c_sram
        * (a.sram_rate * (1.0 - model.guard_sram_share * a.sram_suppressed) + a.flag_rate);
    let mac_array = f * model.c_mac * a.mac_scale * (1.0 - model.guard_mac_share * a.mac_guarded);
    let total = leakage + fixed + sram + mac_array;
    PowerBreakdown {
        leakage,
        fixed,
        sram,
        mac_array,
        total,
        real_tops_per_watt: real_tops_per_watt(stats, op.frequency, total),
    }
}

/// 2 ops per MAC on all 256 units, in GOPS.
pub fn peak_performance(frequency: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(Error::Range(format!("frequency must be positive, got {frequency}")));
    }
    Ok(2.0 * ARRAY_SLOTS as f64 * frequency / 1e9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameEnergy {
    pub energy_mj: f64,
    pub time_s: f64,
    /// Time-weighted average power.
    pub average_power_mw: f64,
}

/// Sums per-layer energies; every layer runs at `frequency`.
pub fn energy_per_frame(layers: &[(PowerBreakdown, u64)], frequency: f64) -> FrameEnergy {
    let mut energy_mj = 0.0;
    let mut time_s = 0.0;
    for (p, cycles) in layers {
        let t = *cycles as f64 / frequency;
        energy_mj += p.total * t;
        time_s += t;
    }
    FrameEnergy {
        energy_mj,
        time_s,
        average_power_mw: if time_s > 0.0 { energy_mj / time_s } else { 0.0 },
    }
}

/// A measured (or derived) power for known activity at a known operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub name: String,
    pub stats: SimStats,
    pub op: OperatingPoint,
    pub measured_mw: f64,
    /// Hold this anchor exactly rather than in the least-squares sense.
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: PowerModel,
    /// `(name, predicted mW, measured mW, relative error)` per anchor.
    pub residuals: Vec<(String, f64, f64, f64)>,
    pub rms_relative_error: f64,
}

pub const MAX_FIT_RMS: f64 = 0.25;

// Coefficient order: c_fixed, c_sram, c_mac, c_sram*g_sram, c_mac*g_mac.
const N_COEF: usize = 5;
/// Inequalities `x_i >= 0` and `x_3 <= x_1`, `x_4 <= x_2`.
const N_CONSTRAINTS: usize = 7;
const EXACT_WEIGHT: f64 = 1e6;

/// Fits the model to `anchors` by relative-error least squares.
///
/// Leakage and the width slope are pinned. The fit searches every active set
/// of the sign and share constraints and keeps the best feasible solution.
pub fn calibrate(anchors: &[Anchor]) -> Result<Calibration> {
    if anchors.len() < 4 {
        return Err(Error::Fit(format!(
            "{} anchors cannot determine {N_COEF} coefficients; need at least 4",
            anchors.len()
        )));
    }
    let distinct = |key: &dyn Fn(&Anchor) -> i64| {
        let mut v: Vec<i64> = anchors.iter().map(key).collect();
        v.sort();
        v.dedup();
        v.len()
    };
    if distinct(&|a| a.op.bits as i64) < 2
        || distinct(&|a| (a.op.voltage * 1e4).round() as i64) < 2
        || distinct(&|a| (a.stats.guarded_macs > 0) as i64) < 2
    {
        return Err(Error::Fit(
            "anchors must vary precision, voltage and guarding".into(),
        ));
    }

    let base = PowerModel::default();
    let rows: Vec<([f64; N_COEF], f64, f64)> = anchors
        .iter()
        .map(|a| {
            let f = a.op.frequency / 1e6;
            let r = Activity::of(&a.stats, &a.op, base.activity_slope).design_row();
            let w = if a.exact { EXACT_WEIGHT } else { 1.0 } / a.measured_mw;
            (r.map(|x| x * f), a.measured_mw - base.p_leak_mw, w)
        })
        .collect();

    let mut best: Option<([f64; N_COEF], f64)> = None;
    for active in 0u32..(1 << N_CONSTRAINTS) {
        let Some(x) = solve_with_active_set(&rows, active) else {
            continue;
        };
        if !feasible(&x) {
            continue;
        }
        let cost: f64 = rows
            .iter()
            .map(|(r, y, w)| {
                let p: f64 = r.iter().zip(&x).map(|(a, b)| a * b).sum();
                ((p - y) * w).powi(2)
            })
            .sum();
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((x, cost));
        }
    }
    let (x, _) = best.ok_or_else(|| Error::Fit("no feasible coefficient set".into()))?;

    let share = |num: f64, den: f64| if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 0.0 };
    let model = PowerModel {
        c_fixed: x[0],
        c_sram: x[1],
        c_mac: x[2],
        guard_sram_share: share(x[3], x[1]),
        guard_mac_share: share(x[4], x[2]),
        ..base
    };

    let residuals: Vec<(String, f64, f64, f64)> = anchors
        .iter()
        .map(|a| {
            let p = layer_power(&a.stats, &a.op, &model).total;
            (a.name.clone(), p, a.measured_mw, (p - a.measured_mw) / a.measured_mw)
        })
        .collect();
    let rms = (residuals.iter().map(|r| r.3 * r.3).sum::<f64>() / residuals.len() as f64).sqrt();
    if rms > MAX_FIT_RMS {
        return Err(Error::Fit(format!(
            "rms relative error {rms:.3} exceeds {MAX_FIT_RMS}"
        )));
    }
    Ok(Calibration {
        model,
        residuals,
        rms_relative_error: rms,
    })
}

fn feasible(x: &[f64; N_COEF]) -> bool {
    const EPS: f64 = 1e-9;
    x.iter().all(|&v| v >= -EPS) && x[3] <= x[1] + EPS && x[4] <= x[2] + EPS
}

/// Least squares with the constraints in `active` held as equalities.
///
/// Each variable is expressed as a combination of free parameters: pinned to
/// zero, tied to another variable (share = 1), or free.
fn solve_with_active_set(rows: &[([f64; N_COEF], f64, f64)], active: u32) -> Option<[f64; N_COEF]> {
    let on = |k: usize| active & (1 << k) != 0;
    // tie[i] = Some(j): x_i = x_j
    let mut zero = [false; N_COEF];
    for (i, z) in zero.iter_mut().enumerate() {
        *z = on(i);
    }
    let tie = [None, None, None, on(5).then_some(1), on(6).then_some(2)];
    // A tie onto a zeroed variable zeroes the tied one too.
    for i in 0..N_COEF {
        if let Some(j) = tie[i] {
            if zero[j] {
                zero[i] = true;
            }
            if zero[i] && !zero[j] {
                return None;
            }
        }
    }
    let free: Vec<usize> = (0..N_COEF).filter(|&i| !zero[i] && tie[i].is_none()).collect();
    if free.is_empty() {
        return None;
    }
    // Column of the reduced design for free variable k gathers x_k and everything tied to it.
    let n = rows.len();
    let mut a = DMatrix::<f64>::zeros(n, free.len());
    let mut b = DVector::<f64>::zeros(n);
    for (r, (row, y, w)) in rows.iter().enumerate() {
        for (c, &k) in free.iter().enumerate() {
            let mut v = row[k];
            for i in 0..N_COEF {
                if tie[i] == Some(k) && !zero[i] {
                    v += row[i];
                }
            }
            a[(r, c)] = v * w;
        }
        b[r] = y * w;
    }
    let z = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let mut x = [0.0; N_COEF];
    for (c, &k) in free.iter().enumerate() {
        x[k] = z[c];
    }
    for i in 0..N_COEF {
        if let Some(j) = tie[i] {
            if !zero[i] {
                x[i] = x[j];
            }
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn voltage_anchors() {
        let v = |b| voltage_for_precision(b, 204e6).unwrap();
        assert!((v(16) - 1.1).abs() < 1e-12);
        assert!((v(8) - 0.9).abs() < 1e-12);
        assert!((v(4) - 0.8).abs() < 1e-12);
        assert!((v(1) - 0.8).abs() < 1e-12);
        assert!((v(12) - 1.0).abs() < 1e-12);
        assert!(voltage_for_precision(0, 204e6).is_err());
        assert!(voltage_for_precision(17, 204e6).is_err());
        assert!(voltage_for_precision(8, 300e6).is_err());
        let low = voltage_for_precision(16, 12e6).unwrap();
        assert!((MIN_VOLTAGE..0.6).contains(&low));
    }

    #[test]
    fn peak_performance_formula() {
        assert!((peak_performance(204e6).unwrap() - 104.448).abs() < 1e-9);
        assert!((peak_performance(12e6).unwrap() - 6.144).abs() < 1e-9);
        assert!(peak_performance(0.0).is_err());
    }

    fn busy_stats() -> SimStats {
        SimStats {
            cycles: 1000,
            useful_macs: 200_000,
            executed_macs: 200_000,
            pixel_words: 10_000,
            weight_words: 16_000,
            sram_reads: 26_000,
            ..Default::default()
        }
    }

    fn some_model() -> PowerModel {
        PowerModel {
            c_fixed: 0.05,
            c_sram: 0.12,
            c_mac: 1.2,
            guard_sram_share: 0.9,
            guard_mac_share: 0.7,
            ..Default::default()
        }
    }

    #[test]
    fn zero_frequency_leaves_leakage() {
        let op = OperatingPoint::new(16, 1.1, 0.0);
        let p = layer_power(&busy_stats(), &op, &some_model());
        assert_eq!(p.total, LEAKAGE_MW);
        assert_eq!(p.real_tops_per_watt, 0.0);
    }

    #[test]
    fn breakdown_sums_to_total() {
        let op = OperatingPoint::new(9, 0.92, 204e6);
        let p = layer_power(&busy_stats(), &op, &some_model());
        assert_eq!(p.total, p.leakage + p.fixed + p.sram + p.mac_array);
        assert!(p.fixed > 0.0 && p.sram > 0.0 && p.mac_array > 0.0);
    }

    #[test]
    fn single_layer_frame_average() {
        let op = OperatingPoint::new(8, 0.9, 204e6);
        let p = layer_power(&busy_stats(), &op, &some_model());
        let e = energy_per_frame(&[(p, 1000)], 204e6);
        assert!((e.average_power_mw - p.total).abs() < 1e-9);
    }

    #[test]
    fn calibration_rejects_underdetermined_sets() {
        let a = Anchor {
            name: "one".into(),
            stats: busy_stats(),
            op: OperatingPoint::new(16, 1.1, 204e6),
            measured_mw: 288.0,
            exact: true,
        };
        assert!(matches!(calibrate(std::slice::from_ref(&a)), Err(Error::Fit(_))));
        assert!(matches!(calibrate(&vec![a; 5]), Err(Error::Fit(_))));
    }

    #[test]
    fn calibration_recovers_a_known_model() {
        let truth = some_model();
        let mut anchors = Vec::new();
        for (i, (bits, v, zero)) in [(16, 1.1, 0.0), (8, 0.9, 0.5), (4, 0.8, 0.8), (7, 0.9, 0.3), (12, 1.0, 0.1), (2, 0.8, 0.9)]
            .into_iter()
            .enumerate()
        {
            let mut s = busy_stats();
            s.sram_reads = 26_000 - (i as u64 * 1000);
            if zero > 0.0 {
                let g = (200_000.0 * zero) as u64;
                s.guarded_macs = g;
                s.executed_macs = 200_000 - g;
                s.pixel_words_suppressed = (10_000.0 * zero) as u64;
                s.sram_reads -= s.pixel_words_suppressed;
                s.flag_bits = 32_000;
            }
            let op = OperatingPoint::new(bits, v, 204e6);
            anchors.push(Anchor {
                name: format!("a{i}"),
                stats: s,
                op,
                measured_mw: layer_power(&s, &op, &truth).total,
                exact: i == 0,
            });
        }
        let cal = calibrate(&anchors).unwrap();
        assert!(cal.rms_relative_error < 1e-6, "{cal:?}");
        assert!((cal.model.c_mac - truth.c_mac).abs() < 1e-6);
        assert!((cal.model.guard_mac_share - truth.guard_mac_share).abs() < 1e-6);
    }

    /// Counts of a layer whose operands have independent zero fractions `zw` and `zp`.
    fn sparse_stats(cycles: u64, zw: f64, zp: f64, guarding: bool) -> SimStats {
        let slots = 256 * cycles;
        let (pw, ww) = (4 * cycles, 16 * cycles);
        let mut s = SimStats {
            cycles,
            useful_macs: slots,
            executed_macs: slots,
            pixel_words: pw,
            weight_words: ww,
            sram_reads: pw + ww,
            ..Default::default()
        };
        if guarding {
            s.executed_macs = (slots as f64 * (1.0 - zw) * (1.0 - zp)).round() as u64;
            s.guarded_macs = slots - s.executed_macs;
            s.pixel_words_suppressed = (pw as f64 * zp).round() as u64;
            s.weight_words_suppressed = (ww as f64 * zw).round() as u64;
            s.sram_reads -= s.pixel_words_suppressed + s.weight_words_suppressed;
            s.flag_bits = 32 * cycles;
        }
        s
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(10_000))]

        #[test]
        fn power_monotone_in_bits(b in 1u8..16, f in 12e6f64..204e6, zw in 0.0f64..1.0, zp in 0.0f64..1.0) {
            let m = PowerModel::default();
            let s = sparse_stats(1000, zw, zp, true);
            let at = |bits| OperatingPoint::new(bits, voltage_for_precision(bits, f).unwrap(), f);
            proptest::prop_assert!(layer_power(&s, &at(b), &m).total <= layer_power(&s, &at(b + 1), &m).total);
        }

        #[test]
        fn power_monotone_in_voltage(b in 1u8..=16, v in 0.55f64..1.1, dv in 0.0f64..0.3, f in 12e6f64..204e6) {
            let m = PowerModel::default();
            let s = sparse_stats(1000, 0.2, 0.5, true);
            let lo = layer_power(&s, &OperatingPoint::new(b, v, f), &m).total;
            let hi = layer_power(&s, &OperatingPoint::new(b, (v + dv).min(1.1), f), &m).total;
            proptest::prop_assert!(lo <= hi);
        }

        #[test]
        fn power_monotone_in_frequency(b in 1u8..=16, f in 12e6f64..204e6, df in 0.0f64..100e6, g in proptest::bool::ANY) {
            let m = PowerModel::default();
            let s = sparse_stats(1000, 0.3, 0.3, g);
            let lo = layer_power(&s, &OperatingPoint::new(b, 1.0, f), &m).total;
            let hi = layer_power(&s, &OperatingPoint::new(b, 1.0, (f + df).min(204e6)), &m).total;
            proptest::prop_assert!(lo <= hi);
        }

        #[test]
        fn power_monotone_in_sparsity(b in 1u8..=16, zw in 0.0f64..1.0, zp in 0.0f64..1.0, dz in 0.0f64..0.5) {
            let m = PowerModel::default();
            let op = OperatingPoint::new(b, 1.0, 204e6);
            let sparse = layer_power(&sparse_stats(1000, zw, (zp + dz).min(1.0), true), &op, &m).total;
            let dense = layer_power(&sparse_stats(1000, zw, zp, true), &op, &m).total;
            proptest::prop_assert!(sparse <= dense + 1e-9);
        }

        #[test]
        fn guarding_dense_data_costs_only_flags(b in 1u8..=16, v in 0.55f64..1.1) {
            let m = PowerModel::default();
            let op = OperatingPoint::new(b, v, 204e6);
            let on = layer_power(&sparse_stats(1000, 0.0, 0.0, true), &op, &m);
            let off = layer_power(&sparse_stats(1000, 0.0, 0.0, false), &op, &m);
            let flags = 204.0 * m.c_sram * 32.0 * FLAG_BIT_COST / REFERENCE_WORDS_PER_CYCLE;
            proptest::prop_assert!((on.total - off.total - flags).abs() < 1e-9);
        }

        #[test]
        fn parts_are_non_negative(b in 1u8..=16, v in 0.55f64..1.1, f in 0.0f64..204e6, zw in 0.0f64..1.0, zp in 0.0f64..1.0) {
            let p = layer_power(&sparse_stats(777, zw, zp, true), &OperatingPoint::new(b, v, f), &PowerModel::default());
            proptest::prop_assert!(p.leakage >= 0.0 && p.fixed >= 0.0 && p.sram >= 0.0 && p.mac_array >= 0.0);
            proptest::prop_assert_eq!(p.total, p.leakage + p.fixed + p.sram + p.mac_array);
        }
    }
}
