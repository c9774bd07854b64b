//! Deterministic synthetic tensors with a prescribed zero fraction.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quant::{check_bits, word_range, QTensor};

/// How nonzero words are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// Uniform over every nonzero code.
    #[default]
    Uniform,
    /// Two-sided geometric magnitudes: `P(|v| = m) ~ q^(m-1)` with `q = (1 - zero_fraction)^2`.
    /// Trained weights concentrate near zero in roughly this way.
    Laplace,
}

/// A tensor of `dims` whose zero count is `round(zero_fraction * len)` exactly.
///
/// Zero positions are a uniform random subset; the rest are drawn from `dist`.
pub fn synth_tensor(
    dims: &[usize],
    bits: u8,
    zero_fraction: f64,
    seed: u64,
    dist: Distribution,
) -> Result<QTensor> {
    let bits = check_bits(bits as u32)?;
    if !(0.0..=1.0).contains(&zero_fraction) {
        return Err(Error::Range(format!(
            "zero fraction {zero_fraction} outside [0, 1]"
        )));
    }
    let n: usize = dims.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = (zero_fraction * n as f64).round() as usize;
    let mut is_zero = vec![false; n];
    for i in sample(&mut rng, n, zeros) {
        is_zero[i] = true;
    }
    let (lo, hi) = word_range(bits);
    let q = (1.0 - zero_fraction).powi(2).clamp(1e-9, 1.0 - 1e-9);
    let data = is_zero
        .iter()
        .map(|&z| {
            if z || hi == 0 {
                0
            } else {
                match dist {
                    Distribution::Uniform => uniform_nonzero(&mut rng, lo, hi),
                    Distribution::Laplace => geometric_nonzero(&mut rng, lo, hi, q),
                }
            }
        })
        .collect();
    QTensor::new(dims.to_vec(), bits, 0, data)
}

fn uniform_nonzero(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> i32 {
    // Draw from lo..hi (one fewer value) and skip over zero.
    let v = rng.gen_range(lo..hi);
    if v >= 0 {
        v + 1
    } else {
        v
    }
}

/// Geometric magnitude truncated to the word range, by inverting its CDF.
fn geometric_nonzero(rng: &mut ChaCha8Rng, lo: i32, hi: i32, q: f64) -> i32 {
    let negative = lo < 0 && rng.gen_bool(0.5);
    let limit = if negative { -(lo as i64) } else { hi as i64 };
    let u: f64 = rng.gen();
    // P(m <= k) = (1 - q^k) / (1 - q^limit)
    let lq = q.ln();
    let mass = -(limit as f64 * lq).exp_m1();
    let m = (1 + ((-u * mass).ln_1p() / lq).floor() as i64).clamp(1, limit);
    if negative {
        -(m as i32)
    } else {
        m as i32
    }
}
