//! Cycle-level simulator of a precision-scalable 2D-SIMD convolution processor.
//!
//! The crate maps convolution layers onto a 16x16 multiply-accumulate array
//! fed by a pixel shift register, executes them bit-exactly with optional
//! zero guarding, models the banked on-chip memory and Huffman-compressed IO,
//! and turns the resulting event counts into power and efficiency figures
//! with a calibrated two-domain energy model.

pub mod anchors;
pub mod datapath;
pub mod energy;
pub mod error;
pub mod huffman;
pub mod mapper;
pub mod memsys;
pub mod network;
pub mod oracle;
pub mod quant;
pub mod report;
pub mod selftest;
pub mod stats;
pub mod synth;
pub mod tensorfile;

pub use error::{Error, Result};
pub use mapper::LayerSpec;
pub use quant::{QTensor, QValue};
pub use stats::SimStats;
