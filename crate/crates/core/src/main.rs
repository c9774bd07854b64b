use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use pscnn::anchors::{leave_one_out, parse_anchor_set, simulate_anchors};
use pscnn::energy::{calibrate, PowerModel};
use pscnn::huffman::{self, HuffStream};
use pscnn::network::{load_config, run_network};
use pscnn::report::{emit_report, Format};
use pscnn::selftest::oracle_equivalence;
use pscnn::synth::{synth_tensor, Distribution};
use pscnn::{tensorfile, QTensor};

#[derive(Parser)]
#[command(name = "pscnn", version, about = "Precision-scalable CNN processor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one frame of a network configuration.
    Simulate {
        config: PathBuf,
        /// Clock in Hz, for every layer.
        #[arg(long)]
        frequency: Option<f64>,
        #[arg(long, value_enum)]
        guarding: Option<OnOff>,
        /// `L:w,i` sets conv layer L (from 1) to w-bit weights and i-bit images. Repeatable.
        #[arg(long = "bits-override", value_parser = parse_bits_override)]
        bits_override: Vec<(usize, u8, u8)>,
        /// `L:v` sets the array supply of conv layer L. Repeatable.
        #[arg(long = "voltage-override", value_parser = parse_voltage_override)]
        voltage_override: Vec<(usize, f64)>,
        #[arg(long)]
        seed: Option<u64>,
        /// Power model coefficients as JSON; defaults to the built-in fit.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the power model to an anchor set and validate by leave-one-out.
    Calibrate {
        anchors: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Huffman-compress a QTSR tensor file into a HUF1 stream.
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expand a HUF1 stream into a one-dimensional QTSR tensor.
    Decode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Exponent to record in the tensor file.
        #[arg(long, default_value_t = 0)]
        exponent: i32,
    },
    /// Write a synthetic QTSR tensor.
    Synth {
        /// Comma-separated dimensions, e.g. `96,27,27`.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        bits: u8,
        #[arg(long)]
        zero_fraction: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        laplace: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the datapath against the brute-force reference on random layers.
    Selftest {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn parse_bits_override(s: &str) -> Result<(usize, u8, u8), String> {
    let err = || format!("expected L:w,i, got `{s}`");
    let (l, rest) = s.split_once(':').ok_or_else(err)?;
    let (w, i) = rest.split_once(',').ok_or_else(err)?;
    Ok((
        l.trim().parse().map_err(|_| err())?,
        w.trim().parse().map_err(|_| err())?,
        i.trim().parse().map_err(|_| err())?,
    ))
}

fn parse_voltage_override(s: &str) -> Result<(usize, f64), String> {
    let err = || format!("expected L:v, got `{s}`");
    let (l, v) = s.split_once(':').ok_or_else(err)?;
    Ok((l.trim().parse().map_err(|_| err())?, v.trim().parse().map_err(|_| err())?))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            frequency,
            guarding,
            bits_override,
            voltage_override,
            seed,
            model,
            format,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(f) = frequency {
                cfg.frequency = f;
            }
            if let Some(g) = guarding {
                cfg.set_guarding(matches!(g, OnOff::On));
            }
            for (l, w, i) in bits_override {
                cfg.override_bits(l, w, i)?;
            }
            for (l, v) in voltage_override {
                cfg.override_voltage(l, v)?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let model: PowerModel = match model {
                Some(p) => serde_json::from_str(&fs::read_to_string(&p)?)
                    .with_context(|| format!("reading power model {}", p.display()))?,
                None => PowerModel::default(),
            };
            let report = run_network(&cfg, &model)?;
            emit(out.as_deref(), &emit_report(&report, format))
        }
        Command::Calibrate { anchors, format, out } => {
            let set = parse_anchor_set(&fs::read_to_string(&anchors)?)?;
            let sims = simulate_anchors(&set)?;
            let cal = calibrate(&sims)?;
            let held: Vec<&str> = set.anchors.iter().filter(|a| !a.exact).map(|a| a.name.as_str()).collect();
            let loo = leave_one_out(&set, &sims, &held)?;
            let text = match format {
                Format::Machine => {
                    let doc = serde_json::json!({ "calibration": cal, "leave_one_out": loo });
                    serde_json::to_string_pretty(&doc)? + "\n"
                }
                Format::Human => {
                    let mut s = format!("fitted model:\n{}\n\n", serde_json::to_string_pretty(&cal.model)?);
                    s += &format!("{:<16} {:>10} {:>10} {:>8} {:>12}\n", "anchor", "fit (mW)", "meas (mW)", "error", "held out");
                    for (name, p, m, e) in &cal.residuals {
                        let h = loo
                            .iter()
                            .find(|h| &h.name == name)
                            .map(|h| format!("{:+.1}%", 100.0 * h.relative_error))
                            .unwrap_or_else(|| "-".into());
                        s += &format!("{name:<16} {p:>10.1} {m:>10.1} {:>+7.1}% {h:>12}\n", 100.0 * e);
                    }
                    s += &format!("rms relative error {:.1}%\n", 100.0 * cal.rms_relative_error);
                    s
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Encode { input, out } => {
            let t = tensorfile::read(fs::File::open(&input).with_context(|| input.display().to_string())?)?;
            let s = huffman::encode(&t.data, t.bits)?;
            fs::write(&out, s.to_bytes())?;
            eprintln!(
                "{} words of {} bits: {} -> {} bytes ({:.2}x)",
                s.count,
                s.bits,
                s.raw_bytes(),
                s.compressed_bytes(),
                s.ratio()
            );
            Ok(())
        }
        Command::Decode { input, out, exponent } => {
            let s = HuffStream::from_bytes(&fs::read(&input)?)?;
            let words = huffman::decode(&s)?;
            let t = QTensor::new(vec![words.len()], s.bits, exponent, words)?;
            tensorfile::write(fs::File::create(&out)?, &t)?;
            Ok(())
        }
        Command::Synth {
            dims,
            bits,
            zero_fraction,
            seed,
            laplace,
            out,
        } => {
            let dist = if laplace { Distribution::Laplace } else { Distribution::Uniform };
            let t = synth_tensor(&dims, bits, zero_fraction, seed, dist)?;
            tensorfile::write(fs::File::create(&out)?, &t)?;
            Ok(())
        }
        Command::Selftest { cases, seed } => {
            let s = oracle_equivalence(cases, seed)?;
            println!(
                "{} random layers: {} oracle mismatches, {} guard mismatches",
                s.cases, s.mismatches, s.guard_mismatches
            );
            for f in &s.failures {
                println!("  {f}");
            }
            if !s.passed() {
                bail!("selftest failed");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
