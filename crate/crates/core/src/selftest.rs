//! Randomized datapath-versus-oracle equivalence runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datapath::{run_layer, OutputFormat};
use crate::error::Result;
use crate::mapper::LayerSpec;
use crate::oracle::reference_conv;
use crate::synth::{synth_tensor, Distribution};

pub const BIT_WIDTHS: [u8; 7] = [1, 2, 4, 7, 8, 9, 16];
pub const KERNELS: [usize; 4] = [1, 3, 5, 11];
pub const STRIDES_H: [usize; 3] = [1, 2, 4];

/// One randomized case: layer, operands and output format.
#[derive(Debug, Clone)]
pub struct Case {
    pub spec: LayerSpec,
    pub weights: crate::QTensor,
    pub image: crate::QTensor,
    pub out: OutputFormat,
}

/// Draws a small conv layer with all spatial extents at most 32.
pub fn random_case(rng: &mut ChaCha8Rng) -> Result<Case> {
    let k = *KERNELS.choose(rng).expect("non-empty");
    let kw = if rng.gen_bool(0.25) { *KERNELS.choose(rng).expect("non-empty") } else { k };
    let pad = rng.gen_range(0..=2usize);
    let groups = if rng.gen_bool(0.3) { 2 } else { 1 };
    let channels = groups * rng.gen_range(1..=3usize);
    let filters = groups * rng.gen_range(1..=12usize);
    let h = rng.gen_range(k.saturating_sub(2 * pad).max(1)..=32);
    let w = rng.gen_range(kw.saturating_sub(2 * pad).max(1)..=32);
    let wb = *BIT_WIDTHS.choose(rng).expect("non-empty");
    let ib = *BIT_WIDTHS.choose(rng).expect("non-empty");
    let spec = LayerSpec::conv(channels, h, w, filters, (k, kw))
        .with_stride(*STRIDES_H.choose(rng).expect("non-empty"), rng.gen_range(1..=3))
        .with_pad(pad)
        .with_groups(groups)
        .with_bits(wb, ib);
    let weights = synth_tensor(&spec.weight_dims(), wb, rng.gen_range(0.0..0.6), rng.gen(), Distribution::Uniform)?;
    let mut image = synth_tensor(&spec.image_dims(), ib, rng.gen_range(0.0..0.9), rng.gen(), Distribution::Uniform)?;
    image.exponent = rng.gen_range(-3..=3);
    let out = OutputFormat {
        bits: *BIT_WIDTHS.choose(rng).expect("non-empty"),
        exponent: weights.exponent + image.exponent + rng.gen_range(0..=12),
    };
    Ok(Case {
        spec,
        weights,
        image,
        out,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelftestSummary {
    pub cases: usize,
    pub mismatches: usize,
    pub guard_mismatches: usize,
    /// Descriptions of the first few failing layers.
    pub failures: Vec<String>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.guard_mismatches == 0
    }
}

/// Runs `cases` random layers with guarding on and off against the oracle.
pub fn oracle_equivalence(cases: usize, seed: u64) -> Result<SelftestSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SelftestSummary {
        cases,
        ..Default::default()
    };
    for n in 0..cases {
        let c = random_case(&mut rng)?;
        let expect = reference_conv(&c.spec, &c.weights, &c.image, c.out.bits, c.out.exponent)?;
        let on = run_layer(&c.spec.clone().with_guarding(true), &c.weights, &c.image, c.out)?;
        let off = run_layer(&c.spec.clone().with_guarding(false), &c.weights, &c.image, c.out)?;
        let bad = on.output != expect || off.output != expect;
        if bad {
            s.mismatches += 1;
        }
        if on.output != off.output {
            s.guard_mismatches += 1;
        }
        if (bad || on.output != off.output) && s.failures.len() < 5 {
            s.failures.push(format!("case {n}: {:?}", c.spec));
        }
    }
    Ok(s)
}
