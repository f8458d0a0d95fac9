use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform absolute-error quantizer, one bin width per class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantizerSpec {
    /// Requested absolute error bound.
    pub eb: f64,
    pub bin_widths: Vec<f64>,
}

impl QuantizerSpec {
    /// Splits the bound evenly: every class gets bin width `2·eb / (L+1)`,
    /// so its rounding error is at most `eb / (L+1)`.
    pub fn new(eb: f64, levels: usize) -> Result<Self> {
        if !(eb.is_finite() && eb > 0.0) {
            return Err(Error::InvalidBound(eb));
        }
        let w = 2.0 * eb / (levels + 1) as f64;
        Ok(Self {
            eb,
            bin_widths: vec![w; levels + 1],
        })
    }

    pub fn classes(&self) -> usize {
        self.bin_widths.len()
    }

    pub(crate) fn halve(&mut self) {
        for w in &mut self.bin_widths {
            *w *= 0.5;
        }
    }
}

const LIMIT: f64 = (1u64 << 62) as f64;

/// Bin indices of `values` for bin width `w`.
pub fn quantize(values: &[f64], w: f64, eb: f64) -> Result<Vec<i64>> {
    values
        .iter()
        .map(|&v| {
            let q = (v / w).round();
            if q.is_finite() && q.abs() < LIMIT {
                Ok(q as i64)
            } else {
                Err(Error::InvalidBound(eb))
            }
        })
        .collect()
}

pub fn dequantize(q: &[i64], w: f64) -> Vec<f64> {
    q.iter().map(|&i| i as f64 * w).collect()
}

/// Appends `v` as a zigzag LEB128 varint.
pub fn put_varint(out: &mut Vec<u8>, v: i64) {
    let mut u = ((v << 1) ^ (v >> 63)) as u64;
    while u >= 0x80 {
        out.push((u as u8) | 0x80);
        u >>= 7;
    }
    out.push(u as u8);
}

/// Reads one zigzag varint at `*pos`, advancing it.
pub fn get_varint(bytes: &[u8], pos: &mut usize) -> Option<i64> {
    let mut u = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        u |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Some(((u >> 1) as i64) ^ -((u & 1) as i64));
        }
    }
    None
}
