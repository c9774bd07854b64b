use serde::{Deserialize, Serialize};

use crate::mapper::ARRAY_SLOTS;

/// Event counters for one simulated (or analytically predicted) layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    /// Compute cycles in the schedule, excluding stalls.
    pub cycles: u64,
    pub stall_cycles: u64,
    /// Dense multiply-accumulates the layer needs (the work delivered).
    pub useful_macs: u64,
    /// MACs that switched the array.
    pub executed_macs: u64,
    /// MACs skipped because an operand was flagged zero.
    pub guarded_macs: u64,
    pub pixel_words: u64,
    pub weight_words: u64,
    pub pixel_words_suppressed: u64,
    pub weight_words_suppressed: u64,
    pub flag_bits: u64,
    pub sram_reads: u64,
    pub sram_writes: u64,
    pub guard_mem_reads: u64,
    pub guard_mem_writes: u64,
    pub dma_words: u64,
    pub dma_raw_bytes: u64,
    pub dma_compressed_bytes: u64,
}

impl SimStats {
    pub fn total_cycles(&self) -> u64 {
        self.cycles + self.stall_cycles
    }

    pub fn issued_slots(&self) -> u64 {
        ARRAY_SLOTS as u64 * self.total_cycles()
    }

    /// Useful MACs over issued array slots.
    pub fn mac_efficiency(&self) -> f64 {
        ratio(self.useful_macs, self.issued_slots())
    }

    pub fn operand_words(&self) -> u64 {
        self.pixel_words + self.weight_words
    }

    pub fn suppressed_words(&self) -> u64 {
        self.pixel_words_suppressed + self.weight_words_suppressed
    }

    pub fn guarded_fraction(&self) -> f64 {
        ratio(self.guarded_macs, self.guarded_macs + self.executed_macs)
    }

    pub fn merge(&mut self, o: &SimStats) {
        self.cycles += o.cycles;
        self.stall_cycles += o.stall_cycles;
        self.useful_macs += o.useful_macs;
        self.executed_macs += o.executed_macs;
        self.guarded_macs += o.guarded_macs;
        self.pixel_words += o.pixel_words;
        self.weight_words += o.weight_words;
        self.pixel_words_suppressed += o.pixel_words_suppressed;
        self.weight_words_suppressed += o.weight_words_suppressed;
        self.flag_bits += o.flag_bits;
        self.sram_reads += o.sram_reads;
        self.sram_writes += o.sram_writes;
        self.guard_mem_reads += o.guard_mem_reads;
        self.guard_mem_writes += o.guard_mem_writes;
        self.dma_words += o.dma_words;
        self.dma_raw_bytes += o.dma_raw_bytes;
        self.dma_compressed_bytes += o.dma_compressed_bytes;
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
