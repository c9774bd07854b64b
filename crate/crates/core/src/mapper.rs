//! Maps a convolution onto the 16x16 2D-SIMD array.
//!
//! A tile is 16 consecutive output pixels of one output row times 16
//! filters, for one input channel. Each tile runs `kh * kw` cycles: every
//! kernel row opens with a cycle that loads 16 pixels and 16 weights,
//! followed by `kw - 1` cycles that fetch one pixel (shifted into the
//! pixel register) and 16 new weights. Partial tiles at the right edge or
//! at the last filter span fetch fewer words but still take full cycles.
//!
//! Tiles are ordered group, filter span, output row, column span, channel.
//! Channels are innermost so partial sums of one output block stay in the
//! accumulator grid until every channel has been folded in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quant::check_bits;
use crate::stats::SimStats;

pub const ARRAY_DIM: usize = 16;
pub const ARRAY_SLOTS: usize = ARRAY_DIM * ARRAY_DIM;
pub const MAX_STRIDE_H: usize = 4;
pub const NOMINAL_VOLTAGE: f64 = 1.1;
pub const NOMINAL_FREQUENCY: f64 = 204e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum LayerKind {
    Conv,
    MaxPool {
        window: (usize, usize),
        stride: (usize, usize),
    },
    Relu,
}

/// One network layer plus the operating point it runs at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_channels: usize,
    pub in_height: usize,
    pub in_width: usize,
    pub num_filters: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride_h: usize,
    pub stride_v: usize,
    pub pad: usize,
    pub groups: usize,
    pub weight_bits: u8,
    pub image_bits: u8,
    pub guarding: bool,
    pub voltage: f64,
    pub frequency: f64,
}

impl LayerSpec {
    /// A stride-1, unpadded, ungrouped conv at the nominal operating point.
    pub fn conv(
        in_channels: usize,
        in_height: usize,
        in_width: usize,
        num_filters: usize,
        kernel: (usize, usize),
    ) -> Self {
        LayerSpec {
            kind: LayerKind::Conv,
            in_channels,
            in_height,
            in_width,
            num_filters,
            kernel_h: kernel.0,
            kernel_w: kernel.1,
            stride_h: 1,
            stride_v: 1,
            pad: 0,
            groups: 1,
            weight_bits: 16,
            image_bits: 16,
            guarding: false,
            voltage: NOMINAL_VOLTAGE,
            frequency: NOMINAL_FREQUENCY,
        }
    }

    pub fn with_stride(mut self, horizontal: usize, vertical: usize) -> Self {
        self.stride_h = horizontal;
        self.stride_v = vertical;
        self
    }

    pub fn with_pad(mut self, pad: usize) -> Self {
        self.pad = pad;
        self
    }

    pub fn with_groups(mut self, groups: usize) -> Self {
        self.groups = groups;
        self
    }

    pub fn with_bits(mut self, weight_bits: u8, image_bits: u8) -> Self {
        self.weight_bits = weight_bits;
        self.image_bits = image_bits;
        self
    }

    pub fn with_guarding(mut self, on: bool) -> Self {
        self.guarding = on;
        self
    }

    pub fn padded_height(&self) -> usize {
        self.in_height + 2 * self.pad
    }

    pub fn padded_width(&self) -> usize {
        self.in_width + 2 * self.pad
    }

    pub fn out_height(&self) -> usize {
        match self.padded_height().checked_sub(self.kernel_h) {
            Some(d) if self.stride_v > 0 => d / self.stride_v + 1,
            _ => 0,
        }
    }

    pub fn out_width(&self) -> usize {
        match self.padded_width().checked_sub(self.kernel_w) {
            Some(d) if self.stride_h > 0 => d / self.stride_h + 1,
            _ => 0,
        }
    }

    pub fn channels_per_group(&self) -> usize {
        self.in_channels / self.groups.max(1)
    }

    pub fn filters_per_group(&self) -> usize {
        self.num_filters / self.groups.max(1)
    }

    /// Words per filter in the `(filters, channels/groups, kh, kw)` weight tensor.
    pub fn weights_per_filter(&self) -> usize {
        self.channels_per_group() * self.kernel_h * self.kernel_w
    }

    pub fn weight_dims(&self) -> Vec<usize> {
        vec![
            self.num_filters,
            self.channels_per_group(),
            self.kernel_h,
            self.kernel_w,
        ]
    }

    pub fn image_dims(&self) -> Vec<usize> {
        vec![self.in_channels, self.in_height, self.in_width]
    }

    pub fn output_dims(&self) -> Vec<usize> {
        match self.kind {
            LayerKind::Conv => vec![self.num_filters, self.out_height(), self.out_width()],
            LayerKind::Relu => self.image_dims(),
            LayerKind::MaxPool { window, stride } => {
                let axis = |n: usize, w: usize, s: usize| {
                    if w == 0 || s == 0 || w > n {
                        0
                    } else {
                        (n - w) / s + 1
                    }
                };
                vec![
                    self.in_channels,
                    axis(self.in_height, window.0, stride.0),
                    axis(self.in_width, window.1, stride.1),
                ]
            }
        }
    }

    /// Dense multiply-accumulates: `H_out * W_out * F * C/groups * kh * kw`.
    pub fn dense_macs(&self) -> u64 {
        if self.kind != LayerKind::Conv {
            return 0;
        }
        (self.out_height() * self.out_width()) as u64
            * self.num_filters as u64
            * self.weights_per_filter() as u64
    }

    pub fn validate(&self) -> Result<()> {
        check_bits(self.weight_bits as u32)?;
        check_bits(self.image_bits as u32)?;
        if self.kind != LayerKind::Conv {
            return Ok(());
        }
        if !(1..=MAX_STRIDE_H).contains(&self.stride_h) {
            return Err(Error::Shape(format!(
                "horizontal stride {} outside [1, {MAX_STRIDE_H}]",
                self.stride_h
            )));
        }
        if self.stride_v == 0 {
            return Err(Error::Shape("vertical stride must be at least 1".into()));
        }
        if self.groups == 0
            || !self.in_channels.is_multiple_of(self.groups)
            || !self.num_filters.is_multiple_of(self.groups)
        {
            return Err(Error::Shape(format!(
                "{} groups must divide {} channels and {} filters",
                self.groups, self.in_channels, self.num_filters
            )));
        }
        if self.in_channels == 0 || self.num_filters == 0 || self.kernel_h == 0 || self.kernel_w == 0
        {
            return Err(Error::Shape(
                "channels, filters and kernel extents must be positive".into(),
            ));
        }
        if self.out_height() == 0 || self.out_width() == 0 {
            return Err(Error::Shape(format!(
                "kernel {}x{} leaves no output on padded input {}x{}",
                self.kernel_h,
                self.kernel_w,
                self.padded_height(),
                self.padded_width()
            )));
        }
        Ok(())
    }

    fn require_conv(&self) -> Result<()> {
        if self.kind != LayerKind::Conv {
            return Err(Error::Shape(format!("{:?} layer cannot be mapped to the array", self.kind)));
        }
        self.validate()
    }
}

/// One array tile: up to 16 outputs of a row times up to 16 filters, one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub group: usize,
    pub filter0: usize,
    pub filters: usize,
    pub out_row: usize,
    pub col0: usize,
    pub cols: usize,
    /// Input channel, counted across all groups.
    pub channel: usize,
}

impl Tile {
    /// True for the tile that opens an output block (first channel of its group).
    pub fn opens_block(&self, spec: &LayerSpec) -> bool {
        self.channel == self.group * spec.channels_per_group()
    }

    pub fn closes_block(&self, spec: &LayerSpec) -> bool {
        self.channel + 1 == (self.group + 1) * spec.channels_per_group()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileMap {
    pub tiles: Vec<Tile>,
}

fn spans(extent: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..extent)
        .step_by(ARRAY_DIM)
        .map(move |start| (start, ARRAY_DIM.min(extent - start)))
}

pub fn tile_layer(spec: &LayerSpec) -> Result<TileMap> {
    spec.require_conv()?;
    let (oh, ow) = (spec.out_height(), spec.out_width());
    let cg = spec.channels_per_group();
    let fg = spec.filters_per_group();
    let mut tiles = Vec::with_capacity(
        spec.groups * fg.div_ceil(ARRAY_DIM) * oh * ow.div_ceil(ARRAY_DIM) * cg,
    );
    for group in 0..spec.groups {
        for (f0, nf) in spans(fg) {
            for out_row in 0..oh {
                for (col0, cols) in spans(ow) {
                    for c in 0..cg {
                        tiles.push(Tile {
                            group,
                            filter0: group * fg + f0,
                            filters: nf,
                            out_row,
                            col0,
                            cols,
                            channel: group * cg + c,
                        });
                    }
                }
            }
        }
    }
    Ok(TileMap { tiles })
}

/// Up to 16 word addresses fetched in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FetchGroup {
    addrs: [u32; ARRAY_DIM],
    len: u8,
}

impl FetchGroup {
    pub fn new() -> Self {
        FetchGroup {
            addrs: [0; ARRAY_DIM],
            len: 0,
        }
    }

    pub fn push(&mut self, addr: usize) {
        self.addrs[self.len as usize] = addr as u32;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.addrs[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl Default for FetchGroup {
    fn default() -> Self {
        Self::new()
    }
}

/// The active (output column, filter) block of the accumulator grid for one kernel tap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacTargets {
    pub tile: Tile,
    pub kh: usize,
    pub kw: usize,
}

impl MacTargets {
    pub fn active(&self) -> usize {
        self.tile.cols * self.tile.filters
    }
}

/// One array cycle.
///
/// Pixel addresses index the zero-padded image `(channels, H + 2 pad, W + 2 pad)`;
/// weight addresses index the `(filters, channels/groups, kh, kw)` tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleEvent {
    pub pixel_fetches: FetchGroup,
    pub weight_fetches: FetchGroup,
    /// Shift cycle: the pixel register shifts by one and takes the single fetched pixel.
    pub shift: bool,
    pub targets: MacTargets,
}

impl CycleEvent {
    /// Guard-flag addresses read this cycle: one per pixel register lane, one per weight lane.
    pub fn flag_fetches(&self, spec: &LayerSpec) -> (FetchGroup, FetchGroup) {
        let mut pixels = FetchGroup::new();
        for j in 0..self.targets.tile.cols {
            pixels.push(pixel_address(spec, &self.targets, j));
        }
        (pixels, self.weight_fetches)
    }
}

/// Address in the padded image of the pixel output column `j` of a tile needs at a tap.
#[inline]
pub fn pixel_address(spec: &LayerSpec, t: &MacTargets, j: usize) -> usize {
    let hp = spec.padded_height();
    let wp = spec.padded_width();
    let y = t.tile.out_row * spec.stride_v + t.kh;
    let x = (t.tile.col0 + j) * spec.stride_h + t.kw;
    (t.tile.channel * hp + y) * wp + x
}

/// Address of the weight for filter `filter` (global index) at a tap.
#[inline]
pub fn weight_address(spec: &LayerSpec, t: &MacTargets, filter: usize) -> usize {
    let local_c = t.tile.channel - t.tile.group * spec.channels_per_group();
    filter * spec.weights_per_filter() + (local_c * spec.kernel_h + t.kh) * spec.kernel_w + t.kw
}

/// Lazily generated cycles of one tile.
#[derive(Debug, Clone)]
pub struct TileCycles<'a> {
    spec: &'a LayerSpec,
    tile: Tile,
    next: usize,
}

impl<'a> TileCycles<'a> {
    pub fn new(spec: &'a LayerSpec, tile: Tile) -> Self {
        TileCycles {
            spec,
            tile,
            next: 0,
        }
    }
}

impl Iterator for TileCycles<'_> {
    type Item = CycleEvent;

    fn next(&mut self) -> Option<CycleEvent> {
        let (kh_n, kw_n) = (self.spec.kernel_h, self.spec.kernel_w);
        if self.next >= kh_n * kw_n {
            return None;
        }
        let (kh, kw) = (self.next / kw_n, self.next % kw_n);
        self.next += 1;
        let targets = MacTargets {
            tile: self.tile,
            kh,
            kw,
        };
        let mut pixel_fetches = FetchGroup::new();
        let shift = kw > 0;
        if shift {
            // The newest lane is the last output column of the tile.
            pixel_fetches.push(pixel_address(self.spec, &targets, self.tile.cols - 1));
        } else {
            for j in 0..self.tile.cols {
                pixel_fetches.push(pixel_address(self.spec, &targets, j));
            }
        }
        let mut weight_fetches = FetchGroup::new();
        for f in self.tile.filter0..self.tile.filter0 + self.tile.filters {
            weight_fetches.push(weight_address(self.spec, &targets, f));
        }
        Some(CycleEvent {
            pixel_fetches,
            weight_fetches,
            shift,
            targets,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.spec.kernel_h * self.spec.kernel_w - self.next;
        (left, Some(left))
    }
}

/// A materialized cycle list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub events: Vec<CycleEvent>,
}

impl Schedule {
    pub fn cycles(&self) -> usize {
        self.events.len()
    }

    pub fn word_fetches(&self) -> usize {
        self.events
            .iter()
            .map(|e| e.pixel_fetches.len() + e.weight_fetches.len())
            .sum()
    }
}

pub fn schedule_tile(spec: &LayerSpec, tile: Tile) -> Schedule {
    Schedule {
        events: TileCycles::new(spec, tile).collect(),
    }
}

/// The whole layer's schedule; cycles are generated on demand.
#[derive(Debug, Clone)]
pub struct LayerSchedule {
    pub spec: LayerSpec,
    pub tiles: TileMap,
}

impl LayerSchedule {
    pub fn events(&self) -> impl Iterator<Item = CycleEvent> + '_ {
        self.tiles
            .tiles
            .iter()
            .flat_map(move |&t| TileCycles::new(&self.spec, t))
    }

    pub fn materialize(&self) -> Schedule {
        Schedule {
            events: self.events().collect(),
        }
    }
}

/// Tiles the layer and predicts cycle, MAC and fetch counts analytically.
pub fn schedule_layer(spec: &LayerSpec) -> Result<(LayerSchedule, SimStats)> {
    check_accumulator_budget(spec)?;
    let tiles = tile_layer(spec)?;
    let predicted = predict_stats(spec)?;
    Ok((
        LayerSchedule {
            spec: spec.clone(),
            tiles,
        },
        predicted,
    ))
}

/// Closed-form counts over tile shapes; no schedule is generated.
pub fn predict_stats(spec: &LayerSpec) -> Result<SimStats> {
    spec.require_conv()?;
    let taps = (spec.kernel_h * spec.kernel_w) as u64;
    let repeats = (spec.groups * spec.out_height() * spec.channels_per_group()) as u64;
    let mut s = SimStats::default();
    for (_, nf) in spans(spec.filters_per_group()) {
        for (_, nc) in spans(spec.out_width()) {
            s.cycles += repeats * taps;
            s.pixel_words +=
                repeats * (spec.kernel_h * (nc + spec.kernel_w - 1)) as u64;
            s.weight_words += repeats * taps * nf as u64;
            s.executed_macs += repeats * taps * (nc * nf) as u64;
        }
    }
    s.useful_macs = spec.dense_macs();
    Ok(s)
}

/// Worst-case accumulation magnitude `C/groups * kh * kw * 2^(wb-1) * 2^(ib-1)` must stay below 2^47.
pub fn check_accumulator_budget(spec: &LayerSpec) -> Result<()> {
    check_bits(spec.weight_bits as u32)?;
    check_bits(spec.image_bits as u32)?;
    let terms = (spec.channels_per_group() * spec.kernel_h * spec.kernel_w) as u128;
    let bound = terms << (spec.weight_bits as u32 - 1 + spec.image_bits as u32 - 1);
    if bound >= 1u128 << 47 {
        return Err(Error::AccumulatorBudget { bound });
    }
    Ok(())
}

/// Operand-fetch ratios of a naive 1D-SIMD array (no reuse) against this schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FetchReduction {
    /// Two operand words per useful MAC over all words fetched.
    pub combined: f64,
    /// One pixel word per useful MAC over pixel words fetched.
    pub pixels_only: f64,
}

pub fn fetch_reduction_vs_1d(spec: &LayerSpec) -> Result<FetchReduction> {
    let s = predict_stats(spec)?;
    let useful = s.useful_macs as f64;
    Ok(FetchReduction {
        combined: 2.0 * useful / s.operand_words() as f64,
        pixels_only: useful / s.pixel_words as f64,
    })
}
