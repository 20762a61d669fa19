//! Binary encodings shared by the key, signature and wire formats.
//!
//! Matrix block: `"FSM1" | rows u32 | cols u32 | width u8 (8 or 16) |`
//! entries as little-endian two's complement, row-major.

use crate::error::{Error, Result};
use crate::hash::BitString;
use crate::trapdoor::TrapdoorPair;
use crate::zq::{IntMatrix, Modulus};

pub const MATRIX_MAGIC: &[u8; 4] = b"FSM1";
pub const TRAPDOOR_MAGIC: &[u8; 4] = b"FSTD";

/// Upper bound on decoded matrix entries, so hostile headers cannot force
/// huge allocations.
pub const MAX_MATRIX_ENTRIES: usize = 1 << 24;

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// Cursor over untrusted bytes; every read is bounds-checked.
#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(fmt_err(format!("truncated: wanted {n} bytes at offset {}, have {}", self.pos, self.remaining())));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != want {
            return Err(fmt_err(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(want)
            )));
        }
        Ok(())
    }

    pub fn matrix(&mut self) -> Result<IntMatrix> {
        self.magic(MATRIX_MAGIC)?;
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let width = self.u8()? as usize;
        if width != 8 && width != 16 {
            return Err(fmt_err(format!("matrix entry width {width}, must be 8 or 16")));
        }
        let count = rows.checked_mul(cols).filter(|&c| c <= MAX_MATRIX_ENTRIES);
        let count = count.ok_or_else(|| fmt_err(format!("matrix {rows}x{cols} too large")))?;
        let raw = self.take(count * width)?;
        let mut data = Vec::with_capacity(count);
        for chunk in raw.chunks_exact(width) {
            let v = if width == 8 {
                i64::from_le_bytes(chunk.try_into().unwrap())
            } else {
                let wide = i128::from_le_bytes(chunk.try_into().unwrap());
                i64::try_from(wide).map_err(|_| fmt_err("matrix entry does not fit in 64 bits"))?
            };
            data.push(v);
        }
        IntMatrix::new(rows, cols, data)
    }

    /// A matrix that must have the given shape.
    pub fn matrix_shaped(&mut self, rows: usize, cols: usize, what: &str) -> Result<IntMatrix> {
        let m = self.matrix()?;
        if m.shape() != (rows, cols) {
            return Err(fmt_err(format!("{what}: expected {rows}x{cols}, got {}x{}", m.rows(), m.cols())));
        }
        Ok(m)
    }

    /// A column block of the given length, returned as a vector.
    pub fn column(&mut self, len: usize, what: &str) -> Result<Vec<i64>> {
        Ok(self.matrix_shaped(len, 1, what)?.into_vec())
    }

    pub fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(fmt_err(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

pub fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn put_matrix(out: &mut Vec<u8>, m: &IntMatrix) {
    out.extend_from_slice(MATRIX_MAGIC);
    put_u32(out, m.rows() as u32);
    put_u32(out, m.cols() as u32);
    out.push(8);
    for &x in m.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn put_column(out: &mut Vec<u8>, v: &[i64]) {
    put_matrix(out, &IntMatrix::column_vector(v));
}

pub fn encode_matrix(m: &IntMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + 8 * m.as_slice().len());
    put_matrix(&mut out, m);
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<IntMatrix> {
    let mut r = Reader::new(bytes);
    let m = r.matrix()?;
    r.finish()?;
    Ok(m)
}

/// Ternary entries, four per byte, entry `i` in bits `2(i mod 4)..`:
/// `00 = 0`, `01 = +1`, `11 = -1`.
pub fn pack_ternary(e: &[i8]) -> Vec<u8> {
    let mut out = vec![0u8; e.len().div_ceil(4)];
    for (i, &x) in e.iter().enumerate() {
        let code = match x {
            0 => 0b00,
            1 => 0b01,
            -1 => 0b11,
            _ => panic!("pack_ternary: entry {x} is not ternary"),
        };
        out[i / 4] |= code << (2 * (i % 4));
    }
    out
}

pub fn unpack_ternary(bytes: &[u8], k: usize) -> Result<Vec<i8>> {
    if bytes.len() != k.div_ceil(4) {
        return Err(fmt_err(format!("ternary vector of {k} entries needs {} bytes", k.div_ceil(4))));
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..bytes.len() * 4 {
        let code = bytes[i / 4] >> (2 * (i % 4)) & 0b11;
        let v = match code {
            0b00 => 0,
            0b01 => 1,
            0b11 => -1,
            _ => return Err(fmt_err("ternary code 10 is reserved")),
        };
        if i < k {
            out.push(v);
        } else if v != 0 {
            return Err(fmt_err("nonzero padding in ternary vector"));
        }
    }
    Ok(out)
}

pub fn read_bits(r: &mut Reader<'_>, len: usize, what: &str) -> Result<BitString> {
    let bytes = r.take(len.div_ceil(8))?.to_vec();
    BitString::from_bytes(len, bytes).ok_or_else(|| fmt_err(format!("{what}: nonzero padding bits")))
}

/// `"FSTD" | A | T | gs_norm f64 LE`.
pub fn encode_trapdoor(pair: &TrapdoorPair) -> Vec<u8> {
    let mut out = TRAPDOOR_MAGIC.to_vec();
    put_matrix(&mut out, &pair.a);
    put_matrix(&mut out, &pair.t);
    out.extend_from_slice(&pair.gs_norm.to_le_bytes());
    out
}

/// Decodes and re-verifies a trapdoor pair; the stored norm must match the
/// recomputed one.
pub fn decode_trapdoor(bytes: &[u8], q: Modulus) -> Result<TrapdoorPair> {
    let mut r = Reader::new(bytes);
    r.magic(TRAPDOOR_MAGIC)?;
    let a = r.matrix()?;
    let t = r.matrix()?;
    let stored = r.f64()?;
    r.finish()?;
    let pair = TrapdoorPair::from_parts(a, t, q)?;
    if (pair.gs_norm - stored).abs() > 1e-9 * stored.abs().max(1.0) {
        return Err(fmt_err(format!("stored GS norm {stored} disagrees with measured {}", pair.gs_norm)));
    }
    Ok(pair)
}
