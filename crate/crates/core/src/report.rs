//! Report rendering.
//!
//! The machine format is pretty-printed JSON. The human format is a table
//! with the columns of the published performance overview, followed by a
//! `[detail]` section of `path = value` lines that carries every counter at
//! full precision, so a human report parses back into the same document.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::network::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Human,
    Machine,
}

const DETAIL_MARKER: &str = "[detail]";

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Machine => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Human => human(report),
    }
}

/// Reads either format back.
pub fn parse_report(text: &str) -> Result<Report> {
    let bad = |m: String| Error::Parse {
        location: "report".into(),
        message: m,
    };
    let value = match text.find(DETAIL_MARKER) {
        Some(at) => {
            let mut root = Value::Null;
            for (n, line) in text[at + DETAIL_MARKER.len()..].lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (path, raw) = line
                    .split_once(" = ")
                    .ok_or_else(|| bad(format!("detail line {}: expected `path = value`", n + 1)))?;
                let v: Value = serde_json::from_str(raw)
                    .map_err(|e| bad(format!("detail line {}: {e}", n + 1)))?;
                insert(&mut root, path, v);
            }
            root
        }
        None => serde_json::from_str(text).map_err(|e| bad(e.to_string()))?,
    };
    serde_json::from_value(value).map_err(|e| bad(e.to_string()))
}

fn pct(z: f64) -> String {
    format!("{:.0}%", z * 100.0)
}

fn mb(bytes: u64) -> f64 {
    bytes as f64 / 1e6
}

fn human(r: &Report) -> String {
    let header = [
        "Layer",
        "Filter / Image bits (0%)",
        "Filter / Image BW Reduc.",
        "IO / HuffIO (MB/frame)",
        "Voltage (V)",
        "MMACs/ Frame",
        "Power (mW)",
        "Real (TOPS/W)",
        "Cycles",
        "Stalls",
        "MAC eff.",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for l in &r.layers {
        let raw = l.weight_io.raw_bytes + l.image_io.raw_bytes;
        let huff = l.weight_io.compressed_bytes + l.image_io.compressed_bytes;
        rows.push(vec![
            l.name.clone(),
            format!(
                "{} ({}) / {} ({})",
                l.weight_bits,
                pct(l.weight_zero_fraction),
                l.image_bits,
                pct(l.image_zero_fraction)
            ),
            format!("{:.2}x / {:.2}x", l.weight_io.ratio(), l.image_io.ratio()),
            format!("{:.3} / {:.3}", mb(raw), mb(huff)),
            format!("{:.2}{}", l.voltage, if l.voltage_feasible { "" } else { "*" }),
            format!("{:.1}", l.dense_macs as f64 / 1e6),
            format!("{:.1}", l.power.total),
            format!("{:.2}", l.power.real_tops_per_watt),
            l.total_cycles().to_string(),
            l.stats.stall_cycles.to_string(),
            format!("{:.3}", l.mac_efficiency),
        ]);
    }
    let t = &r.totals;
    rows.push(vec![
        "Total / avg.".into(),
        "-".into(),
        format!("{:.2}x", t.io_ratio),
        format!("{:.3} / {:.3}", mb(t.raw_io_bytes), mb(t.compressed_io_bytes)),
        "-".into(),
        format!("{:.1}", t.dense_macs as f64 / 1e6),
        format!("{:.1}", t.average_power_mw),
        format!("{:.2}", t.real_tops_per_watt),
        t.cycles.to_string(),
        t.stall_cycles.to_string(),
        format!("{:.3}", t.mac_efficiency),
    ]);

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} at {:.1} MHz (seed {})",
        r.network,
        r.frequency / 1e6,
        r.seed
    );
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        if i == 0 || i == rows.len() - 2 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("-+-"));
        }
    }
    let _ = writeln!(
        out,
        "\n{:.1} fps, {:.4} mJ/frame, {:.1} mW average",
        t.fps, t.energy_mj, t.average_power_mw
    );
    if r.layers.iter().any(|l| !l.voltage_feasible) {
        let _ = writeln!(out, "* supply below the modeled timing requirement for this width");
    }
    let _ = writeln!(out, "\n{DETAIL_MARKER}");
    let value = serde_json::to_value(r).expect("reports serialize");
    flatten(&value, String::new(), &mut out);
    out
}

fn flatten(v: &Value, path: String, out: &mut String) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(x, p, out);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, format!("{path}.{i}"), out);
            }
        }
        _ => {
            let _ = writeln!(out, "{path} = {v}");
        }
    }
}

fn insert(root: &mut Value, path: &str, v: Value) {
    let mut cur = root;
    for seg in path.split('.') {
        cur = match seg.parse::<usize>() {
            Ok(i) => {
                if !cur.is_array() {
                    *cur = Value::Array(Vec::new());
                }
                let a = cur.as_array_mut().expect("just made an array");
                if a.len() <= i {
                    a.resize(i + 1, Value::Null);
                }
                &mut a[i]
            }
            Err(_) => {
                if !cur.is_object() {
                    *cur = Value::Object(Default::default());
                }
                cur.as_object_mut()
                    .expect("just made an object")
                    .entry(seg.to_string())
                    .or_insert(Value::Null)
            }
        };
    }
    *cur = v;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::PowerModel;
    use crate::network::{parse_config, run_network};

    fn sample() -> Report {
        let cfg = parse_config(
            r#"{"name": "s", "layers": [
              {"type": "conv", "name": "a", "input": [2, 10, 20], "filters": 5, "kernel": [3, 3],
               "weight_bits": 5, "image_bits": 3, "voltage": 0.7,
               "weights": {"source": "synthetic", "zero_fraction": 0.3},
               "image": {"source": "synthetic", "zero_fraction": 0.6}}]}"#,
        )
        .unwrap();
        let model = PowerModel {
            c_fixed: 0.1,
            c_sram: 0.2,
            c_mac: 1.0,
            ..Default::default()
        };
        run_network(&cfg, &model).unwrap()
    }

    #[test]
    fn machine_human_machine_round_trip() {
        let r = sample();
        let machine = emit_report(&r, Format::Machine);
        let back = parse_report(&emit_report(&parse_report(&machine).unwrap(), Format::Human)).unwrap();
        assert_eq!(back, r);
        assert_eq!(emit_report(&back, Format::Machine), machine);
    }

    #[test]
    fn human_table_has_overview_columns() {
        let h = emit_report(&sample(), Format::Human);
        let header = h.lines().nth(1).unwrap();
        for col in ["Filter / Image bits (0%)", "IO / HuffIO (MB/frame)", "Real (TOPS/W)", "MMACs/ Frame"] {
            assert!(header.contains(col), "{header}");
        }
        assert!(h.contains("Total / avg."));
        assert!(h.contains("* supply below"));
    }

    #[test]
    fn empty_network_round_trips() {
        let cfg = parse_config(r#"{"name": "e", "layers": []}"#).unwrap();
        let r = run_network(&cfg, &PowerModel::default()).unwrap();
        assert_eq!(parse_report(&emit_report(&r, Format::Human)).unwrap(), r);
    }
}
