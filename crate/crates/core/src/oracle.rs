//! Brute-force references for verification.
//!
//! Nothing here calls into the mapper's tiling or the datapath; the
//! convolution is six nested loops and the narrowing shift is restated
//! with its own arithmetic.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mapper::LayerSpec;
use crate::quant::QTensor;

const LIMIT: i128 = 1 << 47;

fn narrow(v: i128, shift: u32, bits: u8) -> i32 {
    // floor((2|v| + 2^shift) / 2^(shift+1)) is |v| / 2^shift rounded half away from zero.
    let mag = if shift >= 100 {
        0
    } else {
        (2 * v.abs() + (1i128 << shift)) >> (shift + 1)
    };
    let r = if v < 0 { -mag } else { mag };
    let (lo, hi) = if bits == 1 {
        (0, 1)
    } else {
        (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1)
    };
    r.clamp(lo, hi) as i32
}

/// Direct grouped, padded, strided convolution narrowed to `(out_bits, out_exponent)`.
pub fn reference_conv(
    spec: &LayerSpec,
    weights: &QTensor,
    image: &QTensor,
    out_bits: u8,
    out_exponent: i32,
) -> Result<QTensor> {
    let in_sum = weights.exponent + image.exponent;
    if out_exponent < in_sum {
        return Err(Error::Exponent {
            out_exponent,
            in_exponent_sum: in_sum,
        });
    }
    let shift = (out_exponent - in_sum) as u32;
    let (c_in, h, w) = (spec.in_channels, spec.in_height as i64, spec.in_width as i64);
    let (kh, kw) = (spec.kernel_h, spec.kernel_w);
    let groups = spec.groups;
    let cg = c_in / groups;
    let f_total = spec.num_filters;
    let fg = f_total / groups;
    let pad = spec.pad as i64;
    let oh = (h + 2 * pad - kh as i64) / spec.stride_v as i64 + 1;
    let ow = (w + 2 * pad - kw as i64) / spec.stride_h as i64 + 1;
    if oh <= 0 || ow <= 0 {
        return Err(Error::Shape("empty output".into()));
    }
    let (oh, ow) = (oh as usize, ow as usize);
    if weights.data.len() != f_total * cg * kh * kw || image.data.len() != c_in * (h * w) as usize {
        return Err(Error::Shape("operand sizes do not match the layer".into()));
    }

    let mut out = Vec::with_capacity(f_total * oh * ow);
    for f in 0..f_total {
        let g = f / fg;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc: i128 = 0;
                for c in 0..cg {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let y = (oy * spec.stride_v + ky) as i64 - pad;
                            let x = (ox * spec.stride_h + kx) as i64 - pad;
                            if y < 0 || y >= h || x < 0 || x >= w {
                                continue;
                            }
                            let ch = g * cg + c;
                            let p = image.data[(ch * h as usize + y as usize) * w as usize + x as usize];
                            let wt = weights.data[((f * cg + c) * kh + ky) * kw + kx];
                            acc += p as i128 * wt as i128;
                            if acc.abs() >= LIMIT {
                                return Err(Error::AccumulatorOverflow { value: acc });
                            }
                        }
                    }
                }
                out.push(narrow(acc, shift, out_bits));
            }
        }
    }
    QTensor::new(vec![f_total, oh, ow], out_bits, out_exponent, out)
}

/// Operand words a 16x16 array without reuse fetches: two per issued MAC slot.
pub fn naive_fetch_count(spec: &LayerSpec) -> u64 {
    let ceil16 = |n: usize| n.div_ceil(16) as u64;
    let oh = (spec.in_height + 2 * spec.pad - spec.kernel_h) / spec.stride_v + 1;
    let ow = (spec.in_width + 2 * spec.pad - spec.kernel_w) / spec.stride_h + 1;
    let tiles = spec.groups as u64
        * ceil16(spec.num_filters / spec.groups)
        * oh as u64
        * ceil16(ow)
        * (spec.in_channels / spec.groups) as u64;
    2 * 256 * tiles * (spec.kernel_h * spec.kernel_w) as u64
}

/// Shannon entropy in bits per symbol of the empirical distribution of `words`.
///
/// Words are taken as `bits`-wide unsigned patterns.
pub fn empirical_entropy(words: &[i32], bits: u8) -> f64 {
    if words.is_empty() {
        return 0.0;
    }
    let mask = if bits >= 32 { u32::MAX } else { (1u32 << bits) - 1 };
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &w in words {
        *counts.entry(w as u32 & mask).or_default() += 1;
    }
    let n = words.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}
