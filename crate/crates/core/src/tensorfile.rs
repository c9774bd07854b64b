//! `QTSR` binary tensor files.
//!
//! Little-endian layout:
//!
//! ```text
//! "QTSR" | version: u16 | bits: u8 | exponent: i8 | ndims: u8 | dims: u32 * ndims | raw: i16 * len
//! ```
//!
//! One 16-bit word is stored per element whatever the tensor's bit width.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::quant::QTensor;

pub const MAGIC: &[u8; 4] = b"QTSR";
pub const VERSION: u16 = 1;

pub fn to_bytes(t: &QTensor) -> Result<Vec<u8>> {
    let exponent = i8::try_from(t.exponent)
        .map_err(|_| Error::TensorFile(format!("exponent {} does not fit in i8", t.exponent)))?;
    let ndims = u8::try_from(t.dims.len())
        .map_err(|_| Error::TensorFile(format!("{} dims do not fit in u8", t.dims.len())))?;
    let mut out = Vec::with_capacity(11 + 4 * t.dims.len() + 2 * t.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(t.bits);
    out.push(exponent as u8);
    out.push(ndims);
    for &d in &t.dims {
        let d = u32::try_from(d)
            .map_err(|_| Error::TensorFile(format!("extent {d} does not fit in u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &v in &t.data {
        out.extend_from_slice(&(v as i16).to_le_bytes());
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<QTensor> {
    let short = || Error::TensorFile("file truncated".into());
    if bytes.len() < 9 {
        return Err(short());
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::TensorFile("bad magic, expected QTSR".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::TensorFile(format!("unsupported version {version}")));
    }
    let bits = bytes[6];
    let exponent = bytes[7] as i8 as i32;
    let ndims = bytes[8] as usize;
    let mut pos = 9;
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        let b = bytes.get(pos..pos + 4).ok_or_else(short)?;
        dims.push(u32::from_le_bytes(b.try_into().unwrap()) as usize);
        pos += 4;
    }
    let len: usize = dims.iter().product();
    let payload = bytes.get(pos..).ok_or_else(short)?;
    if payload.len() != 2 * len {
        return Err(Error::TensorFile(format!(
            "payload holds {} bytes, dims {:?} need {}",
            payload.len(),
            dims,
            2 * len
        )));
    }
    let data = payload
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as i32)
        .collect();
    QTensor::new(dims, bits, exponent, data)
}

pub fn write<W: Write>(mut w: W, t: &QTensor) -> Result<()> {
    w.write_all(&to_bytes(t)?)
        .map_err(|e| Error::TensorFile(e.to_string()))
}

pub fn read<R: Read>(mut r: R) -> Result<QTensor> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)
        .map_err(|e| Error::TensorFile(e.to_string()))?;
    from_bytes(&buf)
}
