//! Fixed-point words, the 48-bit accumulator and the vector units (ReLU, max-pool).
//!
//! Words are 1 to 16 bits wide. Widths of 2 bits and up are signed two's
//! complement; a 1-bit word is unsigned and holds `{0, 1}`. Every tensor
//! carries a single power-of-two exponent: `value = raw * 2^exponent`.
//!
//! Rounding is half-away-from-zero everywhere. Narrowing a 48-bit
//! accumulation back to a word (`requantize`) is an arithmetic right shift
//! with that rounding followed by saturation; left shifts are rejected.

use crate::error::{Error, Result};

pub const MAX_BITS: u8 = 16;
pub const ACC_BITS: u32 = 48;
/// Exclusive magnitude limit of a legal accumulator value.
pub const ACC_LIMIT: i64 = 1 << (ACC_BITS - 1);

/// Inclusive `(min, max)` raw range of a word of the given width.
pub fn word_range(bits: u8) -> (i32, i32) {
    debug_assert!((1..=MAX_BITS).contains(&bits));
    if bits == 1 {
        (0, 1)
    } else {
        let half = 1i32 << (bits - 1);
        (-half, half - 1)
    }
}

pub fn check_bits(bits: u32) -> Result<u8> {
    if (1..=MAX_BITS as u32).contains(&bits) {
        Ok(bits as u8)
    } else {
        Err(Error::BitWidth(bits))
    }
}

fn saturate(v: i64, bits: u8) -> i32 {
    let (lo, hi) = word_range(bits);
    v.clamp(lo as i64, hi as i64) as i32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QValue {
    pub raw: i32,
    pub bits: u8,
    pub exponent: i32,
}

impl QValue {
    pub fn new(raw: i32, bits: u8, exponent: i32) -> Result<Self> {
        check_bits(bits as u32)?;
        let (lo, hi) = word_range(bits);
        if raw < lo || raw > hi {
            return Err(Error::WordRange {
                value: raw as i64,
                bits,
            });
        }
        Ok(QValue {
            raw,
            bits,
            exponent,
        })
    }
}

/// Quantizes `x` to a `bits`-wide word at scale `2^exponent`. Saturates, never fails.
///
/// Panics if `bits` is outside `[1, 16]`.
pub fn quantize(x: f64, bits: u8, exponent: i32) -> QValue {
    assert!((1..=MAX_BITS).contains(&bits), "bit width {bits} outside [1, 16]");
    let scaled = x / 2f64.powi(exponent);
    let (lo, hi) = word_range(bits);
    let raw = if scaled.is_nan() {
        0
    } else {
        // f64::round is half-away-from-zero.
        scaled.round().clamp(lo as f64, hi as f64) as i32
    };
    QValue {
        raw,
        bits,
        exponent,
    }
}

pub fn dequantize(q: QValue) -> f64 {
    q.raw as f64 * 2f64.powi(q.exponent)
}

/// A signed accumulation register; legal values satisfy `|value| < 2^47`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Accumulator {
    pub value: i64,
}

impl Accumulator {
    pub fn new(value: i64) -> Result<Self> {
        if value.abs() >= ACC_LIMIT {
            return Err(Error::AccumulatorOverflow {
                value: value as i128,
            });
        }
        Ok(Accumulator { value })
    }

    #[inline]
    pub fn add_product(&mut self, w: i32, p: i32) -> Result<()> {
        let next = self.value + w as i64 * p as i64;
        if next.abs() >= ACC_LIMIT {
            return Err(Error::AccumulatorOverflow {
                value: next as i128,
            });
        }
        self.value = next;
        Ok(())
    }
}

/// One multiply-accumulate step.
pub fn mac(acc: Accumulator, w: QValue, p: QValue) -> Result<Accumulator> {
    let mut out = acc;
    out.add_product(w.raw, p.raw)?;
    Ok(out)
}

/// Shift with half-away-from-zero rounding. `shift` may exceed the word size.
pub fn round_shift(value: i64, shift: u32) -> i64 {
    if shift == 0 {
        return value;
    }
    if shift >= 63 {
        return 0;
    }
    let mag = value.unsigned_abs();
    let q = (mag + (1u64 << (shift - 1))) >> shift;
    if value < 0 {
        -(q as i64)
    } else {
        q as i64
    }
}

/// Narrows an accumulation with exponent `in_exponent_sum` to an `out_bits` word at `out_exponent`.
pub fn requantize(
    acc: Accumulator,
    out_bits: u8,
    out_exponent: i32,
    in_exponent_sum: i32,
) -> Result<QValue> {
    check_bits(out_bits as u32)?;
    if out_exponent < in_exponent_sum {
        return Err(Error::Exponent {
            out_exponent,
            in_exponent_sum,
        });
    }
    let shift = (out_exponent - in_exponent_sum) as u32;
    Ok(QValue {
        raw: saturate(round_shift(acc.value, shift), out_bits),
        bits: out_bits,
        exponent: out_exponent,
    })
}

/// Dense fixed-point tensor, row-major.
///
/// Images are `(channels, height, width)`, weights `(filters, channels, kh, kw)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QTensor {
    pub dims: Vec<usize>,
    pub bits: u8,
    pub exponent: i32,
    pub data: Vec<i32>,
}

impl QTensor {
    pub fn new(dims: Vec<usize>, bits: u8, exponent: i32, data: Vec<i32>) -> Result<Self> {
        check_bits(bits as u32)?;
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "dims {:?} hold {} words, data has {}",
                dims,
                len,
                data.len()
            )));
        }
        let (lo, hi) = word_range(bits);
        if let Some(&bad) = data.iter().find(|&&v| v < lo || v > hi) {
            return Err(Error::WordRange {
                value: bad as i64,
                bits,
            });
        }
        Ok(QTensor {
            dims,
            bits,
            exponent,
            data,
        })
    }

    pub fn zeros(dims: Vec<usize>, bits: u8, exponent: i32) -> Self {
        let len = dims.iter().product();
        QTensor {
            dims,
            bits,
            exponent,
            data: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn zero_fraction(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().filter(|&&v| v == 0).count() as f64 / self.data.len() as f64
    }

    /// `(channels, height, width)` of a rank-3 tensor.
    pub fn chw(&self) -> Result<(usize, usize, usize)> {
        match self.dims[..] {
            [c, h, w] => Ok((c, h, w)),
            _ => Err(Error::Shape(format!(
                "expected (channels, height, width), got {:?}",
                self.dims
            ))),
        }
    }
}

pub fn relu_vec(t: &QTensor) -> QTensor {
    QTensor {
        dims: t.dims.clone(),
        bits: t.bits,
        exponent: t.exponent,
        data: t.data.iter().map(|&v| v.max(0)).collect(),
    }
}

/// Per-channel spatial max over `window` positions stepped by `stride`.
pub fn maxpool(t: &QTensor, window: (usize, usize), stride: (usize, usize)) -> Result<QTensor> {
    let (c, h, w) = t.chw()?;
    let (wh, ww) = window;
    let (sh, sw) = stride;
    if wh == 0 || ww == 0 || sh == 0 || sw == 0 {
        return Err(Error::Shape("pool window and stride must be positive".into()));
    }
    if wh > h || ww > w {
        return Err(Error::Shape(format!(
            "pool window {wh}x{ww} exceeds input {h}x{w}"
        )));
    }
    let oh = (h - wh) / sh + 1;
    let ow = (w - ww) / sw + 1;
    let mut data = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let plane = &t.data[ch * h * w..(ch + 1) * h * w];
        for oy in 0..oh {
            for ox in 0..ow {
                let mut m = i32::MIN;
                for dy in 0..wh {
                    let row = &plane[(oy * sh + dy) * w + ox * sw..];
                    for &v in &row[..ww] {
                        m = m.max(v);
                    }
                }
                data.push(m);
            }
        }
    }
    Ok(QTensor {
        dims: vec![c, oh, ow],
        bits: t.bits,
        exponent: t.exponent,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.0, 8, -4).raw, 0);
        assert_eq!(quantize(1.0, 8, -4).raw, 16);
        assert_eq!(quantize(100.0, 4, 0).raw, 7);
        assert_eq!(quantize(-100.0, 4, 0).raw, -8);
        assert_eq!(quantize(2.5, 8, 0).raw, 3);
        assert_eq!(quantize(-2.5, 8, 0).raw, -3);
        assert_eq!(quantize(-0.7, 1, 0).raw, 0);
        assert_eq!(quantize(0.7, 1, 0).raw, 1);
    }

    #[test]
    fn dequantize_examples() {
        assert_eq!(dequantize(QValue { raw: 16, bits: 8, exponent: -4 }), 1.0);
        assert_eq!(dequantize(QValue { raw: 0, bits: 8, exponent: 9 }), 0.0);
        assert_eq!(dequantize(QValue { raw: -8, bits: 8, exponent: -2 }), -2.0);
    }

    #[test]
    fn mac_examples() {
        let w = |raw| QValue { raw, bits: 16, exponent: 0 };
        assert_eq!(mac(Accumulator::new(0).unwrap(), w(3), w(-2)).unwrap().value, -6);
        assert_eq!(mac(Accumulator::new(10).unwrap(), w(0), w(500)).unwrap().value, 10);
        let top = Accumulator::new(ACC_LIMIT - 1).unwrap();
        assert!(matches!(
            mac(top, w(1), w(1)),
            Err(Error::AccumulatorOverflow { .. })
        ));
        assert!(Accumulator::new(-ACC_LIMIT).is_err());
    }

    #[test]
    fn relu_examples() {
        let t = QTensor::new(vec![3], 8, 0, vec![-3, 0, 5]).unwrap();
        assert_eq!(relu_vec(&t).data, vec![0, 0, 5]);
        let neg = QTensor::new(vec![2, 2], 8, 0, vec![-1, -2, -3, -128]).unwrap();
        assert!(relu_vec(&neg).data.iter().all(|&v| v == 0));
        let pos = QTensor::new(vec![4], 8, -3, vec![0, 1, 2, 127]).unwrap();
        assert_eq!(relu_vec(&pos), pos);
    }

    #[test]
    fn maxpool_examples() {
        let t = QTensor::new(vec![1, 2, 2], 8, 0, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(maxpool(&t, (2, 2), (2, 2)).unwrap().data, vec![4]);

        let c = QTensor::new(vec![2, 5, 5], 8, 0, vec![9; 50]).unwrap();
        let p = maxpool(&c, (3, 3), (2, 2)).unwrap();
        assert_eq!(p.dims, vec![2, 2, 2]);
        assert!(p.data.iter().all(|&v| v == 9));

        let ramp = QTensor::new(vec![1, 4, 4], 8, 0, (0..16).collect()).unwrap();
        assert_eq!(maxpool(&ramp, (2, 2), (2, 2)).unwrap().data, vec![5, 7, 13, 15]);

        assert!(matches!(maxpool(&t, (3, 1), (1, 1)), Err(Error::Shape(_))));
    }

    #[test]
    fn requantize_examples() {
        let acc = |v| Accumulator::new(v).unwrap();
        assert_eq!(requantize(acc(256), 8, -4, -8).unwrap().raw, 16);
        assert_eq!(requantize(acc(0), 3, 5, 1).unwrap().raw, 0);
        assert_eq!(requantize(acc(1 << 20), 8, 4, 0).unwrap().raw, 127);
        assert_eq!(requantize(acc(-(1 << 20)), 8, 4, 0).unwrap().raw, -128);
        // 24 / 16 = 1.5 rounds away from zero
        assert_eq!(requantize(acc(24), 8, 4, 0).unwrap().raw, 2);
        assert_eq!(requantize(acc(-24), 8, 4, 0).unwrap().raw, -2);
        assert_eq!(requantize(acc(-5), 1, 0, 0).unwrap().raw, 0);
        assert!(matches!(
            requantize(acc(1), 8, -1, 0),
            Err(Error::Exponent { .. })
        ));
    }

    #[test]
    fn tensor_validation() {
        assert!(QTensor::new(vec![2, 2], 4, 0, vec![0; 3]).is_err());
        assert!(QTensor::new(vec![2], 4, 0, vec![8, 0]).is_err());
        assert!(QTensor::new(vec![2], 1, 0, vec![-1, 0]).is_err());
        assert!(QTensor::new(vec![2], 17, 0, vec![0, 0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn exact_values_round_trip(bits in 1u8..=16, exponent in -12i32..12, frac in 0.0f64..1.0) {
            let (lo, hi) = word_range(bits);
            let raw = lo + ((hi - lo) as f64 * frac) as i32;
            let x = raw as f64 * 2f64.powi(exponent);
            let q = quantize(x, bits, exponent);
            prop_assert_eq!(q.raw, raw);
            prop_assert_eq!(dequantize(q), x);
        }

        #[test]
        fn quantize_is_monotone(bits in 1u8..=16, exponent in -8i32..8, a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize(x, bits, exponent).raw <= quantize(y, bits, exponent).raw);
        }

        #[test]
        fn zero_operand_leaves_accumulator(acc in -(ACC_LIMIT - 1)..ACC_LIMIT, other in -32768i32..32768) {
            let a = Accumulator::new(acc).unwrap();
            let zero = QValue { raw: 0, bits: 16, exponent: 0 };
            let x = QValue { raw: other, bits: 16, exponent: 0 };
            prop_assert_eq!(mac(a, zero, x).unwrap(), a);
            prop_assert_eq!(mac(a, x, zero).unwrap(), a);
        }

        #[test]
        fn round_shift_matches_float_rounding(v in -(1i64 << 46)..(1i64 << 46), shift in 0u32..40) {
            let expect = (v as f64 / 2f64.powi(shift as i32)).round() as i64;
            prop_assert_eq!(round_shift(v, shift), expect);
        }
    }
}
