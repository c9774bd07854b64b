//! On-chip data memory: 4 blocks of 16 single-port 2 kB banks plus a guard-flag store.
//!
//! The processor has two block ports and the DMA one. Per cycle the
//! processor may touch at most two distinct blocks, the DMA one further
//! block, and each single-port bank serves at most one access. Requests that
//! do not fit are deferred to later rounds in issue order; every extra round
//! is a stall cycle.
//!
//! Large tensors do not fit a 32 kB block. They stream through a window
//! (`Region`) that the DMA refills; the simulator only needs the bank each
//! access lands in.

use crate::error::{Error, Result};
use crate::mapper::{CycleEvent, LayerSpec, ARRAY_DIM};
use crate::datapath::GuardFlags;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryConfig {
    pub banks_per_block: usize,
    pub blocks: usize,
    pub bank_bytes: usize,
    pub word_bytes: usize,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig {
            banks_per_block: 16,
            blocks: 4,
            bank_bytes: 2048,
            word_bytes: 2,
        }
    }
}

impl MemoryConfig {
    pub fn total_bytes(&self) -> usize {
        self.banks_per_block * self.blocks * self.bank_bytes
    }

    pub fn block_bytes(&self) -> usize {
        self.banks_per_block * self.bank_bytes
    }

    pub fn words_per_bank(&self) -> usize {
        self.bank_bytes / self.word_bytes
    }

    /// One flag bit per data word.
    pub fn guard_mem_bits(&self) -> usize {
        self.total_bytes() / self.word_bytes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requester {
    ProcessorA,
    ProcessorB,
    Dma,
}

impl Requester {
    fn is_processor(self) -> bool {
        !matches!(self, Requester::Dma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRequest {
    pub requester: Requester,
    pub block: u8,
    pub bank: u8,
    pub access: Access,
}

/// How a tensor's word index spreads over the 16 banks of its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `bank = index mod 16`.
    Linear,
    /// Image rows stored for strided row fetches: column `x` goes to bank
    /// `(x / stride + x % stride) mod 16`, so 16 columns `stride` apart hit 16 banks.
    Strided { row_words: usize, stride: usize },
    /// `(filters, ...)` weights where the 16 filters of one fetch sit in 16 banks.
    FilterMinor { per_filter: usize },
}

impl Layout {
    #[inline]
    pub fn bank(&self, index: usize) -> usize {
        match *self {
            Layout::Linear => index % ARRAY_DIM,
            Layout::Strided { row_words, stride } => {
                let x = index % row_words;
                (x / stride + x % stride) % ARRAY_DIM
            }
            Layout::FilterMinor { per_filter } => (index / per_filter) % ARRAY_DIM,
        }
    }
}

/// A tensor's window inside one block: `rows` words in each of the 16 banks, from `base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub block: u8,
    pub base: usize,
    pub rows: usize,
}

/// Hands out non-overlapping regions.
#[derive(Debug, Clone)]
pub struct MemoryMap {
    config: MemoryConfig,
    used_rows: Vec<usize>,
}

impl MemoryMap {
    pub fn new(config: MemoryConfig) -> Self {
        MemoryMap {
            used_rows: vec![0; config.blocks],
            config,
        }
    }

    /// Reserves `words` words (rounded up to whole bank rows) in `block`.
    pub fn allocate(&mut self, block: u8, words: usize) -> Result<Region> {
        let b = block as usize;
        if b >= self.config.blocks {
            return Err(Error::Capacity(format!("no block {block}")));
        }
        let rows = words.div_ceil(self.config.banks_per_block).max(1);
        let limit = self.config.words_per_bank();
        if self.used_rows[b] + rows > limit {
            return Err(Error::Capacity(format!(
                "block {block}: {} bytes requested, {} of {} bytes free",
                rows * self.config.banks_per_block * self.config.word_bytes,
                (limit - self.used_rows[b]) * self.config.banks_per_block * self.config.word_bytes,
                self.config.block_bytes()
            )));
        }
        let region = Region {
            block,
            base: self.used_rows[b],
            rows,
        };
        self.used_rows[b] += rows;
        Ok(region)
    }

    /// A region spanning all of `block`, used as a streaming window.
    pub fn window(&mut self, block: u8) -> Result<Region> {
        self.allocate(block, self.config.words_per_bank() * self.config.banks_per_block)
    }
}

/// `(block, bank, offset)` of a tensor word.
pub fn map_address(region: &Region, word_index: usize, layout: Layout) -> (u8, u8, usize) {
    let bank = layout.bank(word_index) as u8;
    let offset = region.base + (word_index / ARRAY_DIM) % region.rows;
    (region.block, bank, offset)
}

/// Outcome of arbitrating one cycle's requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arbitration {
    /// Round (0-based) in which each request was granted, in request order.
    pub grant_round: Vec<u32>,
    pub stall_cycles: u64,
}

/// Reusable arbiter scratch; `rounds` avoids allocation on the hot path.
#[derive(Debug, Clone, Default)]
pub struct Arbiter {
    pending: Vec<usize>,
    deferred: Vec<usize>,
}

impl Arbiter {
    /// Grants `requests` oldest-first; returns the number of rounds (0 for no requests).
    pub fn rounds(&mut self, requests: &[AccessRequest], mut on_grant: impl FnMut(usize, u32)) -> u32 {
        self.pending.clear();
        self.pending.extend(0..requests.len());
        let mut round = 0u32;
        while !self.pending.is_empty() {
            let mut bank_busy = [0u16; 8];
            let mut proc_blocks: [u8; 2] = [u8::MAX; 2];
            let mut n_proc = 0usize;
            let mut dma_block = u8::MAX;
            self.deferred.clear();
            for &i in &self.pending {
                let r = requests[i];
                let b = r.block;
                let bank_bit = 1u16 << r.bank;
                let ok = if bank_busy[b as usize] & bank_bit != 0 {
                    false
                } else if r.requester.is_processor() {
                    let known = proc_blocks[..n_proc].contains(&b);
                    if known {
                        true
                    } else if n_proc < 2 && b != dma_block {
                        proc_blocks[n_proc] = b;
                        n_proc += 1;
                        true
                    } else {
                        false
                    }
                } else if dma_block == b {
                    true
                } else if dma_block == u8::MAX && !proc_blocks[..n_proc].contains(&b) {
                    dma_block = b;
                    true
                } else {
                    false
                };
                if ok {
                    bank_busy[b as usize] |= bank_bit;
                    on_grant(i, round);
                } else {
                    self.deferred.push(i);
                }
            }
            std::mem::swap(&mut self.pending, &mut self.deferred);
            round += 1;
        }
        round
    }
}

/// Serializes conflicting requests; `stall_cycles` counts rounds beyond the first.
pub fn arbitrate(requests: &[AccessRequest]) -> Arbitration {
    let mut grant_round = vec![0u32; requests.len()];
    let rounds = Arbiter::default().rounds(requests, |i, r| grant_round[i] = r);
    Arbitration {
        grant_round,
        stall_cycles: rounds.saturating_sub(1) as u64,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MemStats {
    pub sram_reads: u64,
    pub sram_writes: u64,
    /// Guard-flag bits read.
    pub guard_reads: u64,
    pub guard_writes: u64,
    pub stall_cycles: u64,
    pub requests: u64,
    pub grants: u64,
}

/// Block roles of one layer. Roles rotate round-robin from layer to layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRoles {
    pub image: u8,
    pub weights: u8,
    pub dma: u8,
    pub output: u8,
}

impl BlockRoles {
    pub fn for_layer(index: usize) -> Self {
        let r = |k: usize| ((index + k) % 4) as u8;
        BlockRoles {
            image: r(0),
            weights: r(1),
            dma: r(2),
            output: r(3),
        }
    }
}

/// Per-layer memory traffic model driven one cycle at a time.
#[derive(Debug, Clone)]
pub struct MemSystem {
    image: Region,
    weights: Region,
    output: Region,
    dma: Region,
    image_layout: Layout,
    weight_layout: Layout,
    output_layout: Layout,
    dma_per_cycle: u64,
    dma_left: u64,
    dma_cursor: usize,
    drain: Vec<usize>,
    requests: Vec<AccessRequest>,
    arbiter: Arbiter,
    pub stats: MemStats,
}

impl MemSystem {
    /// Sets up windows and layouts for `spec`; `dma_words` are spread evenly over `cycles`.
    pub fn for_layer(spec: &LayerSpec, layer_index: usize, dma_words: u64, cycles: u64) -> Result<Self> {
        let roles = BlockRoles::for_layer(layer_index);
        let mut map = MemoryMap::new(MemoryConfig::default());
        let image_layout = if spec.stride_h == 1 {
            Layout::Linear
        } else {
            Layout::Strided {
                row_words: spec.padded_width(),
                stride: spec.stride_h,
            }
        };
        Ok(MemSystem {
            image: map.window(roles.image)?,
            weights: map.window(roles.weights)?,
            dma: map.window(roles.dma)?,
            output: map.window(roles.output)?,
            image_layout,
            weight_layout: Layout::FilterMinor {
                per_filter: spec.weights_per_filter().max(1),
            },
            output_layout: Layout::Linear,
            dma_per_cycle: dma_words.div_ceil(cycles.max(1)).min(ARRAY_DIM as u64),
            dma_left: dma_words,
            dma_cursor: 0,
            drain: Vec::new(),
            requests: Vec::with_capacity(64),
            arbiter: Arbiter::default(),
            stats: MemStats::default(),
        })
    }

    /// Queues accumulator write-back; it is arbitrated with the next cycle's reads.
    pub fn queue_drain(&mut self, output_addrs: impl IntoIterator<Item = usize>) {
        self.drain.extend(output_addrs);
    }

    /// One compute cycle: the non-suppressed pixel and weight reads, plus flag bits read.
    pub fn cycle(&mut self, pixels: &[u32], weights: &[u32], flag_bits: u64) -> u64 {
        self.requests.clear();
        for &a in pixels {
            let (block, bank, _) = map_address(&self.image, a as usize, self.image_layout);
            self.requests.push(AccessRequest {
                requester: Requester::ProcessorA,
                block,
                bank,
                access: Access::Read,
            });
        }
        for &a in weights {
            let (block, bank, _) = map_address(&self.weights, a as usize, self.weight_layout);
            self.requests.push(AccessRequest {
                requester: Requester::ProcessorB,
                block,
                bank,
                access: Access::Read,
            });
        }
        self.push_drain();
        self.push_dma();
        self.stats.guard_reads += flag_bits;
        let stalls = self.arbitrate_pending().saturating_sub(1) as u64;
        self.stats.stall_cycles += stalls;
        stalls
    }

    /// Write-back left over after the last compute cycle; every round is a stall.
    pub fn finish(&mut self) -> u64 {
        self.requests.clear();
        self.push_drain();
        let stalls = self.arbitrate_pending() as u64;
        self.stats.stall_cycles += stalls;
        stalls
    }

    fn push_drain(&mut self) {
        for a in self.drain.drain(..) {
            let (block, bank, _) = map_address(&self.output, a, self.output_layout);
            self.requests.push(AccessRequest {
                requester: Requester::ProcessorA,
                block,
                bank,
                access: Access::Write,
            });
        }
    }

    fn push_dma(&mut self) {
        let n = self.dma_per_cycle.min(self.dma_left);
        for _ in 0..n {
            let (block, bank, _) = map_address(&self.dma, self.dma_cursor, Layout::Linear);
            self.requests.push(AccessRequest {
                requester: Requester::Dma,
                block,
                bank,
                access: Access::Write,
            });
            self.dma_cursor += 1;
        }
        self.dma_left -= n;
    }

    fn arbitrate_pending(&mut self) -> u32 {
        let mut reads = 0u64;
        let mut writes = 0u64;
        let mut grants = 0u64;
        let reqs = &self.requests;
        let rounds = self.arbiter.rounds(reqs, |i, _| {
            grants += 1;
            match reqs[i].access {
                Access::Read => reads += 1,
                Access::Write => writes += 1,
            }
        });
        self.stats.requests += self.requests.len() as u64;
        self.stats.grants += grants;
        self.stats.sram_reads += reads;
        self.stats.sram_writes += writes;
        rounds
    }
}

/// Replays a schedule against the memory model, suppressing guarded word fetches.
///
/// Write-back of accumulators is not part of a bare schedule and is not counted here.
pub fn account_accesses(
    spec: &LayerSpec,
    schedule: impl IntoIterator<Item = CycleEvent>,
    guarding: bool,
    pixel_flags: &GuardFlags,
    weight_flags: &GuardFlags,
) -> Result<MemStats> {
    let mut mem = MemSystem::for_layer(spec, 0, 0, 1)?;
    let mut pix = Vec::with_capacity(ARRAY_DIM);
    let mut wts = Vec::with_capacity(ARRAY_DIM);
    for ev in schedule {
        pix.clear();
        wts.clear();
        pix.extend(
            ev.pixel_fetches
                .as_slice()
                .iter()
                .filter(|&&a| !guarding || pixel_flags.get(a as usize)),
        );
        wts.extend(
            ev.weight_fetches
                .as_slice()
                .iter()
                .filter(|&&a| !guarding || weight_flags.get(a as usize)),
        );
        let flag_bits = if guarding { 2 * ARRAY_DIM as u64 } else { 0 };
        mem.cycle(&pix, &wts, flag_bits);
    }
    Ok(mem.stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{schedule_tile, tile_layer};
    use proptest::prelude::*;

    fn req(requester: Requester, block: u8, bank: u8) -> AccessRequest {
        AccessRequest {
            requester,
            block,
            bank,
            access: Access::Read,
        }
    }

    #[test]
    fn config_capacity() {
        let c = MemoryConfig::default();
        assert_eq!(c.total_bytes(), 128 * 1024);
        assert_eq!(c.words_per_bank(), 1024);
    }

    #[test]
    fn linear_interleave() {
        let region = Region {
            block: 2,
            base: 0,
            rows: 1024,
        };
        for i in 0..16 {
            assert_eq!(map_address(&region, i, Layout::Linear), (2, i as u8, 0));
        }
        assert_eq!(map_address(&region, 16, Layout::Linear), (2, 0, 1));
    }

    #[test]
    fn strided_row_fetch_hits_distinct_banks() {
        for stride in 1..=4 {
            let layout = Layout::Strided {
                row_words: 235,
                stride,
            };
            for k in 0..11 {
                let mut banks: Vec<_> = (0..16).map(|j| layout.bank(j * stride + k)).collect();
                banks.sort();
                banks.dedup();
                assert_eq!(banks.len(), 16, "stride {stride} tap {k}");
            }
        }
    }

    #[test]
    fn allocation_capacity() {
        let mut map = MemoryMap::new(MemoryConfig::default());
        map.allocate(0, 8192).unwrap();
        map.allocate(0, 8192).unwrap();
        assert!(matches!(map.allocate(0, 1), Err(Error::Capacity(_))));
        map.allocate(1, 16384).unwrap();
        assert!(map.allocate(4, 1).is_err());
    }

    #[test]
    fn steady_state_pattern_has_no_stalls() {
        let mut reqs = Vec::new();
        for b in 0..16 {
            reqs.push(req(Requester::ProcessorA, 0, b));
        }
        for b in 0..16 {
            reqs.push(req(Requester::ProcessorB, 1, b));
        }
        for b in 0..16 {
            reqs.push(AccessRequest {
                access: Access::Write,
                ..req(Requester::Dma, 2, b)
            });
        }
        assert_eq!(arbitrate(&reqs).stall_cycles, 0);
    }

    #[test]
    fn bank_and_port_conflicts() {
        let same_bank = [req(Requester::ProcessorA, 0, 3), req(Requester::ProcessorB, 0, 3)];
        assert_eq!(arbitrate(&same_bank).stall_cycles, 1);
        let three_blocks = [
            req(Requester::ProcessorA, 0, 0),
            req(Requester::ProcessorB, 1, 0),
            req(Requester::ProcessorA, 2, 0),
        ];
        let a = arbitrate(&three_blocks);
        assert_eq!(a.stall_cycles, 1);
        assert_eq!(a.grant_round, vec![0, 0, 1]);
        // DMA may not share a block with the processor in the same round.
        let shared = [req(Requester::ProcessorA, 0, 0), req(Requester::Dma, 0, 1)];
        assert_eq!(arbitrate(&shared).stall_cycles, 1);
    }

    /// Brute force over every processor request pattern of up to four accesses,
    /// one per bank so only the two-block port limit binds.
    #[test]
    fn processor_port_limit_exhaustive() {
        for n in 1..=4usize {
            for code in 0..4usize.pow(n as u32) {
                let blocks: Vec<u8> = (0..n).map(|i| ((code / 4usize.pow(i as u32)) % 4) as u8).collect();
                let reqs: Vec<_> = blocks
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| req(Requester::ProcessorA, b, i as u8))
                    .collect();
                let mut distinct = blocks.clone();
                distinct.sort();
                distinct.dedup();
                let expect = distinct.len().div_ceil(2) as u64 - 1;
                assert_eq!(arbitrate(&reqs).stall_cycles, expect, "{blocks:?}");
            }
        }
    }

    #[test]
    fn unguarded_tile_reads_match_fetch_count() {
        let spec = LayerSpec::conv(1, 11, 26, 16, (11, 11));
        let tile = tile_layer(&spec).unwrap().tiles[0];
        let sched = schedule_tile(&spec, tile);
        let ones = |n| GuardFlags::from_bits(vec![true; n]);
        let px = ones(spec.image_dims().iter().product());
        let wt = ones(spec.weight_dims().iter().product());
        let s = account_accesses(&spec, sched.events.clone(), false, &px, &wt).unwrap();
        assert_eq!(s.sram_reads, 2222);
        assert_eq!(s.guard_reads, 0);
        assert_eq!(s.stall_cycles, 0);

        let zeros = GuardFlags::from_bits(vec![false; px.len()]);
        let g = account_accesses(&spec, sched.events, true, &zeros, &wt).unwrap();
        assert_eq!(g.sram_reads, 121 * 16);
        assert_eq!(g.guard_reads, 121 * 32);
    }

    fn any_request() -> impl Strategy<Value = AccessRequest> {
        (0u8..3, 0u8..4, 0u8..16).prop_map(|(who, block, bank)| AccessRequest {
            requester: [Requester::ProcessorA, Requester::ProcessorB, Requester::Dma][who as usize],
            block,
            bank,
            access: Access::Read,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn arbitration_conserves_and_respects_ports(reqs in prop::collection::vec(any_request(), 0..48)) {
            let a = arbitrate(&reqs);
            prop_assert_eq!(a.grant_round.len(), reqs.len());
            let rounds = a.grant_round.iter().copied().max().map_or(0, |r| r + 1);
            prop_assert_eq!(a.stall_cycles, rounds.saturating_sub(1) as u64);
            for r in 0..rounds {
                let granted: Vec<_> = reqs.iter().zip(&a.grant_round).filter(|(_, &g)| g == r).map(|(q, _)| *q).collect();
                prop_assert!(!granted.is_empty());
                let mut banks: Vec<_> = granted.iter().map(|q| (q.block, q.bank)).collect();
                banks.sort();
                let n = banks.len();
                banks.dedup();
                prop_assert_eq!(banks.len(), n);
                let mut pb: Vec<_> = granted.iter().filter(|q| q.requester.is_processor()).map(|q| q.block).collect();
                pb.sort();
                pb.dedup();
                prop_assert!(pb.len() <= 2);
                let mut db: Vec<_> = granted.iter().filter(|q| !q.requester.is_processor()).map(|q| q.block).collect();
                db.sort();
                db.dedup();
                prop_assert!(db.len() <= 1);
                prop_assert!(db.iter().all(|b| !pb.contains(b)));
            }
        }

        #[test]
        fn fetch_groups_use_sixteen_banks(start in 0usize..100_000) {
            let mut banks: Vec<_> = (start..start + 16).map(|i| Layout::Linear.bank(i)).collect();
            banks.sort();
            banks.dedup();
            prop_assert_eq!(banks.len(), 16);
        }
    }
}
