//! Canonical Huffman coding of tensor word streams (DMA IO compression).
//!
//! Each transfer carries its own code-length table, so decoding is
//! stateless. Symbols are whole words read as `bits`-wide unsigned patterns.
//!
//! Serialized form (`HUF1`), little-endian integers:
//!
//! ```text
//! "HUF1" | bits: u8 | count: u32 | entries: u16 | (symbol: u16, length: u8) * entries | payload
//! ```
//!
//! The payload is packed most-significant-bit first and zero-padded to a
//! byte boundary. A full 65536-entry table is written with `entries = 0`
//! (unambiguous because a non-empty stream always has at least one entry).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::quant::check_bits;

pub const MAGIC: &[u8; 4] = b"HUF1";
const HEADER_BYTES: usize = 4 + 1 + 4 + 2;
const ENTRY_BYTES: usize = 3;
const MAX_CODE_LEN: u8 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffStream {
    pub bits: u8,
    pub count: u32,
    /// `(symbol, code length)` sorted by symbol; absent symbols are omitted.
    pub table: Vec<(u16, u8)>,
    pub payload: Vec<u8>,
    /// Meaningful payload bits; the rest of the last byte is padding.
    pub payload_bits: u64,
}

impl HuffStream {
    pub fn header_bytes(&self) -> usize {
        HEADER_BYTES + ENTRY_BYTES * self.table.len()
    }

    /// Total serialized size including header and table.
    pub fn compressed_bytes(&self) -> usize {
        self.header_bytes() + self.payload.len()
    }

    /// Size of the words packed at their native width.
    pub fn raw_bytes(&self) -> usize {
        (self.count as usize * self.bits as usize).div_ceil(8)
    }

    pub fn raw_bits(&self) -> u64 {
        self.count as u64 * self.bits as u64
    }

    /// Native bits over payload bits; header excluded.
    pub fn payload_ratio(&self) -> f64 {
        if self.payload_bits == 0 {
            return 1.0;
        }
        self.raw_bits() as f64 / self.payload_bits as f64
    }

    /// End-to-end ratio including header and table.
    pub fn ratio(&self) -> f64 {
        if self.count == 0 {
            return 1.0;
        }
        self.raw_bytes() as f64 / self.compressed_bytes() as f64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.compressed_bytes());
        out.extend_from_slice(MAGIC);
        out.push(self.bits);
        out.extend_from_slice(&self.count.to_le_bytes());
        let entries = if self.table.len() == 1 << 16 {
            0u16
        } else {
            self.table.len() as u16
        };
        out.extend_from_slice(&entries.to_le_bytes());
        for &(sym, len) in &self.table {
            out.extend_from_slice(&sym.to_le_bytes());
            out.push(len);
        }
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses the container; the payload is validated by [`decode`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptStream(m.to_string());
        if bytes.len() < HEADER_BYTES {
            return Err(corrupt("header truncated"));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic, expected HUF1"));
        }
        let bits = bytes[4];
        check_bits(bits as u32).map_err(|_| corrupt("symbol width outside [1, 16]"))?;
        let count = u32::from_le_bytes(bytes[5..9].try_into().unwrap());
        let mut entries = u16::from_le_bytes([bytes[9], bytes[10]]) as usize;
        if entries == 0 && count > 0 {
            entries = 1 << 16;
        }
        let table_end = HEADER_BYTES + ENTRY_BYTES * entries;
        if bytes.len() < table_end {
            return Err(corrupt("code table truncated"));
        }
        let table = bytes[HEADER_BYTES..table_end]
            .chunks_exact(ENTRY_BYTES)
            .map(|e| (u16::from_le_bytes([e[0], e[1]]), e[2]))
            .collect();
        let payload = bytes[table_end..].to_vec();
        let payload_bits = payload.len() as u64 * 8;
        Ok(HuffStream {
            bits,
            count,
            table,
            payload,
            payload_bits,
        })
    }
}

fn mask(bits: u8) -> u32 {
    (1u32 << bits) - 1
}

fn symbol_of(word: i32, bits: u8) -> u32 {
    word as u32 & mask(bits)
}

fn word_of(symbol: u32, bits: u8) -> i32 {
    if bits == 1 {
        return symbol as i32;
    }
    // sign-extend a two's complement pattern
    let shift = 32 - bits as u32;
    ((symbol << shift) as i32) >> shift
}

/// Huffman code lengths for the nonzero entries of `freqs`, indexed by symbol.
fn code_lengths(freqs: &[u64]) -> Vec<(u16, u8)> {
    let present: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    match present.len() {
        0 => return Vec::new(),
        1 => return vec![(present[0] as u16, 1)],
        _ => {}
    }
    // Nodes 0..n are leaves; internal nodes are appended. Ties break on node id.
    let n = present.len();
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = present
        .iter()
        .enumerate()
        .map(|(i, &s)| Reverse((freqs[s], i)))
        .collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().unwrap();
        let Reverse((fb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((fa + fb, next)));
        next += 1;
    }
    // Parents always have larger ids, so depths resolve walking down from the root.
    let mut depth = vec![0u8; 2 * n - 1];
    for node in (0..2 * n - 2).rev() {
        depth[node] = depth[parent[node]] + 1;
    }
    present
        .iter()
        .enumerate()
        .map(|(i, &s)| (s as u16, depth[i]))
        .collect()
}

/// Canonical codes: symbols sorted by (length, symbol) get consecutive codes.
fn canonical_codes(table: &[(u16, u8)]) -> Vec<(u16, u8, u64)> {
    let mut order: Vec<(u16, u8)> = table.to_vec();
    order.sort_by_key(|&(s, l)| (l, s));
    let mut code = 0u64;
    let mut prev_len = 0u8;
    let mut out = Vec::with_capacity(order.len());
    for (i, &(s, l)) in order.iter().enumerate() {
        if i > 0 {
            code = (code + 1) << (l - prev_len);
        } else {
            code = 0;
        }
        prev_len = l;
        out.push((s, l, code));
    }
    out
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    fill: u32,
    total: u64,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            acc: 0,
            fill: 0,
            total: 0,
        }
    }

    fn put(&mut self, code: u64, len: u8) {
        for i in (0..len).rev() {
            self.acc = (self.acc << 1) | ((code >> i) & 1);
            self.fill += 1;
            if self.fill == 8 {
                self.bytes.push(self.acc as u8);
                self.acc = 0;
                self.fill = 0;
            }
        }
        self.total += len as u64;
    }

    fn finish(mut self) -> (Vec<u8>, u64) {
        if self.fill > 0 {
            self.bytes.push((self.acc << (8 - self.fill)) as u8);
        }
        (self.bytes, self.total)
    }
}

/// Compresses `words`, each of which must fit a `bits`-wide word.
pub fn encode(words: &[i32], bits: u8) -> Result<HuffStream> {
    check_bits(bits as u32)?;
    let (lo, hi) = crate::quant::word_range(bits);
    if let Some(&w) = words.iter().find(|&&w| w < lo || w > hi) {
        return Err(Error::WordRange {
            value: w as i64,
            bits,
        });
    }
    let count = u32::try_from(words.len())
        .map_err(|_| Error::Range(format!("{} words exceed a u32 count", words.len())))?;
    let mut freqs = vec![0u64; 1 << bits];
    for &w in words {
        freqs[symbol_of(w, bits) as usize] += 1;
    }
    let table = code_lengths(&freqs);
    let mut lookup = vec![(0u64, 0u8); 1 << bits];
    for (s, l, c) in canonical_codes(&table) {
        lookup[s as usize] = (c, l);
    }
    let mut w = BitWriter::new();
    for &word in words {
        let (c, l) = lookup[symbol_of(word, bits) as usize];
        w.put(c, l);
    }
    let (payload, payload_bits) = w.finish();
    Ok(HuffStream {
        bits,
        count,
        table,
        payload,
        payload_bits,
    })
}

/// Reconstructs the words of `s`.
pub fn decode(s: &HuffStream) -> Result<Vec<i32>> {
    let corrupt = |m: String| Error::CorruptStream(m);
    check_bits(s.bits as u32).map_err(|_| corrupt("symbol width outside [1, 16]".into()))?;
    if s.count == 0 {
        return Ok(Vec::new());
    }
    if s.table.is_empty() {
        return Err(corrupt("empty code table for a non-empty stream".into()));
    }
    let mut kraft = 0f64;
    for &(sym, len) in &s.table {
        if len == 0 || len > MAX_CODE_LEN {
            return Err(corrupt(format!("code length {len} for symbol {sym}")));
        }
        if sym as u32 > mask(s.bits) {
            return Err(corrupt(format!("symbol {sym} wider than {} bits", s.bits)));
        }
        kraft += 0.5f64.powi(len as i32);
    }
    if kraft > 1.0 + 1e-12 {
        return Err(corrupt(format!("code lengths violate the Kraft inequality ({kraft})")));
    }

    // Per-length first code and index into the canonical symbol order.
    let codes = canonical_codes(&s.table);
    let max_len = codes.last().map(|c| c.1).unwrap_or(0) as usize;
    let mut first_code = vec![0u64; max_len + 1];
    let mut first_index = vec![0usize; max_len + 1];
    let mut n_of_len = vec![0usize; max_len + 1];
    for (i, &(_, l, c)) in codes.iter().enumerate() {
        let l = l as usize;
        if n_of_len[l] == 0 {
            first_code[l] = c;
            first_index[l] = i;
        }
        n_of_len[l] += 1;
    }

    let mut out = Vec::with_capacity(s.count as usize);
    let total_bits = s.payload.len() as u64 * 8;
    let mut pos = 0u64;
    while out.len() < s.count as usize {
        let mut code = 0u64;
        let mut len = 0usize;
        loop {
            if pos >= total_bits {
                return Err(corrupt(format!(
                    "payload truncated after {} of {} symbols",
                    out.len(),
                    s.count
                )));
            }
            let bit = (s.payload[(pos / 8) as usize] >> (7 - pos % 8)) & 1;
            pos += 1;
            code = (code << 1) | bit as u64;
            len += 1;
            if len > max_len {
                return Err(corrupt(format!("no code matches at bit {pos}")));
            }
            if n_of_len[len] > 0 && code >= first_code[len] && code - first_code[len] < n_of_len[len] as u64 {
                let sym = codes[first_index[len] + (code - first_code[len]) as usize].0;
                out.push(word_of(sym as u32, s.bits));
                break;
            }
        }
    }
    if total_bits - pos >= 8 {
        return Err(corrupt("trailing bytes after the last symbol".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionReport {
    pub raw_bytes: Vec<usize>,
    pub compressed_bytes: Vec<usize>,
    pub per_stream: Vec<f64>,
    pub overall: f64,
}

/// Ratios on total bytes, headers included.
pub fn compression_report(streams: &[&HuffStream]) -> CompressionReport {
    let raw_bytes: Vec<usize> = streams.iter().map(|s| s.raw_bytes()).collect();
    let compressed_bytes: Vec<usize> = streams.iter().map(|s| s.compressed_bytes()).collect();
    let per_stream = streams.iter().map(|s| s.ratio()).collect();
    let raw: usize = raw_bytes.iter().sum();
    let comp: usize = compressed_bytes.iter().sum();
    CompressionReport {
        overall: if comp == 0 { 1.0 } else { raw as f64 / comp as f64 },
        raw_bytes,
        compressed_bytes,
        per_stream,
    }
}
