//! Cycle-by-cycle execution of a schedule on the 16x16 MAC array.
//!
//! Pixel lane `i` of the shift register holds the operand of output column
//! `cols - 1 - i` of the current tile: a shift moves every lane up by one and
//! the freshly fetched pixel enters lane 0. Weight lane `j` holds filter
//! `filter0 + j`. Accumulator `(i, j)` belongs to that (column, filter) pair
//! for the whole output block.
//!
//! With guarding on, a word whose flag is 0 is not fetched (the lane is
//! known to be zero) and every MAC with a zero-flagged operand is skipped.
//! Guarding never changes results, only counters.

use crate::error::{Error, Result};
use crate::mapper::{
    check_accumulator_budget, pixel_address, tile_layer, CycleEvent, FetchGroup, LayerSpec,
    TileCycles, ARRAY_DIM,
};
use crate::memsys::MemSystem;
use crate::quant::{requantize, word_range, Accumulator, QTensor, ACC_LIMIT};
use crate::stats::SimStats;

/// One bit per tensor word: set iff the word is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardFlags {
    words: Vec<u64>,
    len: usize,
}

impl GuardFlags {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, b) in bits.iter().enumerate() {
            if *b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        GuardFlags {
            words,
            len: bits.len(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.words.iter().map(|w| w.count_ones() as usize).sum::<usize>()
    }
}

/// Flags for every word of `data` and the fraction of zero words.
pub fn compute_guard_flags(data: &[i32]) -> (GuardFlags, f64) {
    let mut words = vec![0u64; data.len().div_ceil(64)];
    let mut zeros = 0usize;
    for (i, &v) in data.iter().enumerate() {
        if v != 0 {
            words[i / 64] |= 1 << (i % 64);
        } else {
            zeros += 1;
        }
    }
    let frac = if data.is_empty() {
        0.0
    } else {
        zeros as f64 / data.len() as f64
    };
    (
        GuardFlags {
            words,
            len: data.len(),
        },
        frac,
    )
}

/// Counters for one cycle, plus the word fetches that actually reached SRAM.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CycleStats {
    pub macs_executed: u32,
    pub macs_guarded: u32,
    pub pixel_words: u32,
    pub weight_words: u32,
    pub pixel_suppressed: u32,
    pub weight_suppressed: u32,
    pub flag_bits: u32,
    pub pixel_reads: FetchGroup,
    pub weight_reads: FetchGroup,
}

/// Operand memories seen by the array for one layer.
#[derive(Debug, Clone, Copy)]
pub struct Operands<'a> {
    pub spec: &'a LayerSpec,
    /// Zero-padded image, `(channels, H + 2 pad, W + 2 pad)`.
    pub image: &'a [i32],
    pub weights: &'a [i32],
    pub image_flags: &'a GuardFlags,
    pub weight_flags: &'a GuardFlags,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayState {
    pub pixel_regs: [i32; ARRAY_DIM],
    pub weight_regs: [i32; ARRAY_DIM],
    pub pixel_flags: [bool; ARRAY_DIM],
    pub weight_flags: [bool; ARRAY_DIM],
    /// `acc_grid[pixel lane][weight lane]`.
    pub acc_grid: [[i64; ARRAY_DIM]; ARRAY_DIM],
}

impl Default for ArrayState {
    fn default() -> Self {
        ArrayState {
            pixel_regs: [0; ARRAY_DIM],
            weight_regs: [0; ARRAY_DIM],
            pixel_flags: [false; ARRAY_DIM],
            weight_flags: [false; ARRAY_DIM],
            acc_grid: [[0; ARRAY_DIM]; ARRAY_DIM],
        }
    }
}

impl ArrayState {
    pub fn clear_accumulators(&mut self) {
        self.acc_grid = [[0; ARRAY_DIM]; ARRAY_DIM];
    }

    pub fn accumulator(&self, pixel_lane: usize, weight_lane: usize) -> Accumulator {
        Accumulator {
            value: self.acc_grid[pixel_lane][weight_lane],
        }
    }

    /// `(value, flag, suppressed)` of one word.
    #[inline]
    fn load(flags: &GuardFlags, data: &[i32], addr: usize, guarding: bool) -> (i32, bool, bool) {
        let flag = flags.get(addr);
        if guarding && !flag {
            (0, false, true)
        } else {
            (data[addr], flag, false)
        }
    }

    /// Executes one cycle in place.
    pub fn step(&mut self, event: &CycleEvent, guarding: bool, ops: &Operands) -> Result<CycleStats> {
        let mut cs = CycleStats::default();
        let t = &event.targets;
        let cols = t.tile.cols;
        let filters = t.tile.filters;

        // Pixel register.
        if !event.shift {
            for (j, &a) in event.pixel_fetches.as_slice().iter().enumerate() {
                let (v, flag, suppressed) = Self::load(ops.image_flags, ops.image, a as usize, guarding);
                let lane = cols - 1 - j;
                self.pixel_regs[lane] = v;
                self.pixel_flags[lane] = flag;
                cs.pixel_words += 1;
                if suppressed {
                    cs.pixel_suppressed += 1;
                } else {
                    cs.pixel_reads.push(a as usize);
                }
            }
        } else {
            let a = event.pixel_fetches.as_slice()[0] as usize;
            let (v, flag, suppressed) = Self::load(ops.image_flags, ops.image, a, guarding);
            cs.pixel_words += 1;
            if suppressed {
                cs.pixel_suppressed += 1;
            } else {
                cs.pixel_reads.push(a);
            }
            if ops.spec.stride_h == 1 {
                self.pixel_regs.copy_within(0..ARRAY_DIM - 1, 1);
                self.pixel_flags.copy_within(0..ARRAY_DIM - 1, 1);
                self.pixel_regs[0] = v;
                self.pixel_flags[0] = flag;
            } else {
                // Strided rows: lanes are re-addressed rather than shifted; only
                // the newest pixel is charged as a fetch.
                for j in 0..cols {
                    let addr = pixel_address(ops.spec, t, j);
                    let lane = cols - 1 - j;
                    let (v, flag, _) = Self::load(ops.image_flags, ops.image, addr, guarding);
                    self.pixel_regs[lane] = v;
                    self.pixel_flags[lane] = flag;
                }
            }
        }

        // Weight register.
        for (j, &a) in event.weight_fetches.as_slice().iter().enumerate() {
            let (v, flag, suppressed) = Self::load(ops.weight_flags, ops.weights, a as usize, guarding);
            self.weight_regs[j] = v;
            self.weight_flags[j] = flag;
            cs.weight_words += 1;
            if suppressed {
                cs.weight_suppressed += 1;
            } else {
                cs.weight_reads.push(a as usize);
            }
        }

        // MAC grid.
        for i in 0..cols {
            let p = self.pixel_regs[i] as i64;
            let pf = self.pixel_flags[i];
            let row = &mut self.acc_grid[i];
            for j in 0..filters {
                if guarding && !(pf && self.weight_flags[j]) {
                    cs.macs_guarded += 1;
                    continue;
                }
                let next = row[j] + p * self.weight_regs[j] as i64;
                if next.abs() >= ACC_LIMIT {
                    return Err(Error::AccumulatorOverflow { value: next as i128 });
                }
                row[j] = next;
                cs.macs_executed += 1;
            }
        }
        if guarding {
            cs.flag_bits = 2 * ARRAY_DIM as u32;
        }
        Ok(cs)
    }
}

/// Copies `image` into a zero border of `spec.pad` words.
pub fn pad_image(spec: &LayerSpec, image: &QTensor) -> Vec<i32> {
    let (c, h, w) = (spec.in_channels, spec.in_height, spec.in_width);
    let (hp, wp, p) = (spec.padded_height(), spec.padded_width(), spec.pad);
    if p == 0 {
        return image.data.clone();
    }
    let mut out = vec![0; c * hp * wp];
    for ch in 0..c {
        for y in 0..h {
            let src = &image.data[(ch * h + y) * w..(ch * h + y + 1) * w];
            let dst = (ch * hp + y + p) * wp + p;
            out[dst..dst + w].copy_from_slice(src);
        }
    }
    out
}

/// Word width and exponent of a layer's requantized output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFormat {
    pub bits: u8,
    pub exponent: i32,
}

/// Full-precision accumulations of a layer, `(filters, H_out, W_out)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawOutput {
    pub dims: Vec<usize>,
    pub exponent_sum: i32,
    pub data: Vec<i64>,
}

impl RawOutput {
    pub fn requantize(&self, out: OutputFormat) -> Result<QTensor> {
        let data = self
            .data
            .iter()
            .map(|&v| requantize(Accumulator { value: v }, out.bits, out.exponent, self.exponent_sum).map(|q| q.raw))
            .collect::<Result<Vec<_>>>()?;
        Ok(QTensor {
            dims: self.dims.clone(),
            bits: out.bits,
            exponent: out.exponent,
            data,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerRun {
    pub output: QTensor,
    pub stats: SimStats,
}

fn check_operand(name: &str, t: &QTensor, dims: &[usize], bits: u8) -> Result<()> {
    if t.dims != dims {
        return Err(Error::Shape(format!(
            "{name} dims {:?} do not match the layer's {:?}",
            t.dims, dims
        )));
    }
    let (lo, hi) = word_range(bits);
    if let Some(&v) = t.data.iter().find(|&&v| v < lo || v > hi) {
        return Err(Error::WordRange {
            value: v as i64,
            bits,
        });
    }
    Ok(())
}

/// Runs the layer's whole schedule and returns un-narrowed accumulations.
///
/// `layer_index` selects the memory block roles; `dma_words` is the DMA
/// traffic spread over the layer.
pub fn run_layer_raw(
    spec: &LayerSpec,
    weights: &QTensor,
    image: &QTensor,
    layer_index: usize,
    dma_words: u64,
) -> Result<(RawOutput, SimStats)> {
    spec.validate()?;
    check_accumulator_budget(spec)?;
    check_operand("weights", weights, &spec.weight_dims(), spec.weight_bits)?;
    check_operand("image", image, &spec.image_dims(), spec.image_bits)?;
    let tiles = tile_layer(spec)?;

    let padded = pad_image(spec, image);
    let (image_flags, _) = compute_guard_flags(&padded);
    let (weight_flags, _) = compute_guard_flags(&weights.data);
    let ops = Operands {
        spec,
        image: &padded,
        weights: &weights.data,
        image_flags: &image_flags,
        weight_flags: &weight_flags,
    };

    let (oh, ow) = (spec.out_height(), spec.out_width());
    let mut out = vec![0i64; spec.num_filters * oh * ow];
    let cycles = tiles.tiles.len() as u64 * (spec.kernel_h * spec.kernel_w) as u64;
    let mut mem = MemSystem::for_layer(spec, layer_index, dma_words, cycles)?;
    let mut state = ArrayState::default();
    let mut stats = SimStats::default();
    let guarding = spec.guarding;

    for &tile in &tiles.tiles {
        if tile.opens_block(spec) {
            state.clear_accumulators();
        }
        for ev in TileCycles::new(spec, tile) {
            let cs = state.step(&ev, guarding, &ops)?;
            stats.cycles += 1;
            stats.executed_macs += cs.macs_executed as u64;
            stats.guarded_macs += cs.macs_guarded as u64;
            stats.pixel_words += cs.pixel_words as u64;
            stats.weight_words += cs.weight_words as u64;
            stats.pixel_words_suppressed += cs.pixel_suppressed as u64;
            stats.weight_words_suppressed += cs.weight_suppressed as u64;
            stats.flag_bits += cs.flag_bits as u64;
            mem.cycle(cs.pixel_reads.as_slice(), cs.weight_reads.as_slice(), cs.flag_bits as u64);
        }
        if tile.closes_block(spec) {
            let mut addrs = Vec::with_capacity(tile.cols * tile.filters);
            for j in 0..tile.filters {
                for c in 0..tile.cols {
                    let lane = tile.cols - 1 - c;
                    let idx = ((tile.filter0 + j) * oh + tile.out_row) * ow + tile.col0 + c;
                    out[idx] = state.acc_grid[lane][j];
                    addrs.push(idx);
                }
            }
            mem.queue_drain(addrs);
        }
    }
    mem.finish();

    let ms = mem.stats;
    stats.stall_cycles = ms.stall_cycles;
    stats.useful_macs = spec.dense_macs();
    stats.sram_reads = ms.sram_reads;
    stats.sram_writes = ms.sram_writes;
    stats.guard_mem_reads = ms.guard_reads;
    stats.guard_mem_writes = if guarding { out.len() as u64 } else { 0 };
    stats.dma_words = dma_words;

    Ok((
        RawOutput {
            dims: vec![spec.num_filters, oh, ow],
            exponent_sum: weights.exponent + image.exponent,
            data: out,
        },
        stats,
    ))
}

/// Runs a conv layer and narrows its accumulations to `out`.
pub fn run_layer(
    spec: &LayerSpec,
    weights: &QTensor,
    image: &QTensor,
    out: OutputFormat,
) -> Result<LayerRun> {
    let (raw, stats) = run_layer_raw(spec, weights, image, 0, 0)?;
    Ok(LayerRun {
        output: raw.requantize(out)?,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{schedule_tile, Tile};

    #[test]
    fn guard_flag_examples() {
        let (f, z) = compute_guard_flags(&[0, 3, 0, -1]);
        assert_eq!((0..4).map(|i| f.get(i)).collect::<Vec<_>>(), vec![false, true, false, true]);
        assert_eq!(z, 0.5);
        let (f, z) = compute_guard_flags(&[0; 100]);
        assert_eq!(f.count_zeros(), 100);
        assert_eq!(z, 1.0);
    }

    fn full_tile_setup(image_val: impl Fn(usize) -> i32) -> (LayerSpec, Vec<i32>, Vec<i32>, Tile) {
        let spec = LayerSpec::conv(1, 1, 16, 16, (1, 1)).with_bits(8, 8);
        let image: Vec<i32> = (0..16).map(image_val).collect();
        let weights = vec![1; 16];
        let tile = tile_layer(&spec).unwrap().tiles[0];
        (spec, image, weights, tile)
    }

    fn one_cycle(image_val: impl Fn(usize) -> i32, guarding: bool) -> CycleStats {
        let (spec, image, weights, tile) = full_tile_setup(image_val);
        let (pf, _) = compute_guard_flags(&image);
        let (wf, _) = compute_guard_flags(&weights);
        let ops = Operands {
            spec: &spec,
            image: &image,
            weights: &weights,
            image_flags: &pf,
            weight_flags: &wf,
        };
        let ev = schedule_tile(&spec, tile).events[0];
        ArrayState::default().step(&ev, guarding, &ops).unwrap()
    }

    #[test]
    fn step_examples() {
        let all = one_cycle(|i| i as i32 + 1, true);
        assert_eq!((all.macs_executed, all.macs_guarded), (256, 0));
        assert_eq!(all.flag_bits, 32);

        let none = one_cycle(|_| 0, true);
        assert_eq!((none.macs_executed, none.macs_guarded), (0, 256));
        assert_eq!(none.pixel_suppressed, 16);
        assert_eq!(none.pixel_reads.len(), 0);

        let half = one_cycle(|i| (i % 2) as i32, true);
        assert_eq!((half.macs_executed, half.macs_guarded), (128, 128));

        let off = one_cycle(|_| 0, false);
        assert_eq!((off.macs_executed, off.macs_guarded, off.flag_bits), (256, 0, 0));
    }

    #[test]
    fn shift_register_moves_lanes_up() {
        // 1x3 kernel over a 1x18 row: 16 outputs, two shift cycles.
        let spec = LayerSpec::conv(1, 1, 18, 1, (1, 3)).with_bits(8, 8);
        let image: Vec<i32> = (0..18).collect();
        let weights = vec![1, 1, 1];
        let (pf, _) = compute_guard_flags(&image);
        let (wf, _) = compute_guard_flags(&weights);
        let ops = Operands {
            spec: &spec,
            image: &image,
            weights: &weights,
            image_flags: &pf,
            weight_flags: &wf,
        };
        let tile = tile_layer(&spec).unwrap().tiles[0];
        let mut st = ArrayState::default();
        for ev in schedule_tile(&spec, tile).events {
            st.step(&ev, false, &ops).unwrap();
        }
        // lane 0 holds the last column's operand at the last tap: x = 15 + 2
        assert_eq!(st.pixel_regs[0], 17);
        assert_eq!(st.pixel_regs[15], 2);
        for lane in 0..16 {
            let col = 15 - lane as i64;
            assert_eq!(st.acc_grid[lane][0], 3 * col + 3);
        }
    }

    #[test]
    fn identity_kernel_requantizes_input() {
        let spec = LayerSpec::conv(1, 3, 5, 1, (1, 1)).with_bits(8, 8);
        let image = QTensor::new(vec![1, 3, 5], 8, 0, (0..15).map(|v| v * 8 - 60).collect()).unwrap();
        let weights = QTensor::new(vec![1, 1, 1, 1], 8, 0, vec![1]).unwrap();
        let run = run_layer(&spec, &weights, &image, OutputFormat { bits: 8, exponent: 0 }).unwrap();
        assert_eq!(run.output.data, image.data);
        let run = run_layer(&spec, &weights, &image, OutputFormat { bits: 4, exponent: 3 }).unwrap();
        let expect: Vec<i32> = image.data.iter().map(|&v| crate::quant::round_shift(v as i64, 3).clamp(-8, 7) as i32).collect();
        assert_eq!(run.output.data, expect);
    }

    #[test]
    fn rejects_mismatched_operands() {
        let spec = LayerSpec::conv(2, 4, 4, 1, (3, 3)).with_bits(4, 4);
        let image = QTensor::zeros(vec![2, 4, 4], 4, 0);
        let bad_w = QTensor::zeros(vec![1, 1, 3, 3], 4, 0);
        assert!(matches!(
            run_layer(&spec, &bad_w, &image, OutputFormat { bits: 4, exponent: 0 }),
            Err(Error::Shape(_))
        ));
        let wide = QTensor::new(vec![1, 2, 3, 3], 8, 0, vec![100; 18]).unwrap();
        assert!(matches!(
            run_layer(&spec, &wide, &image, OutputFormat { bits: 4, exponent: 0 }),
            Err(Error::WordRange { .. })
        ));
    }
}
