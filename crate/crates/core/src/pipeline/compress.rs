use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TensorGrid;
use crate::real::{Precision, Real};
use crate::refactor::{decompose, recompose_values, RefactoredData};

use super::codec::{codec_by_id, LosslessCodec};
use super::quantize::{dequantize, get_varint, put_varint, quantize, QuantizerSpec};

pub const MAGIC: &[u8; 4] = b"MGRZ";
const VERSION: u8 = 1;
/// Bin-width halvings tried before giving up on a bound.
const MAX_REFINEMENTS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressStats {
    pub eb: f64,
    /// Max-abs error of the decoded field against the input.
    pub max_abs_error: f64,
    pub quantizer: QuantizerSpec,
    /// How often the bin widths were halved to meet the bound.
    pub refinements: usize,
    pub codec: String,
    pub original_bytes: usize,
    pub compressed_bytes: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Compressed {
    pub bytes: Vec<u8>,
    pub stats: CompressStats,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompressReport {
    pub eb: f64,
    /// Error measured by the compressor on exactly this output.
    pub max_abs_error: f64,
    pub codec: String,
    pub levels: usize,
}

/// Decomposes, quantizes every class with its bin width and encodes the
/// bin indices losslessly. The decoded field is checked against `grid`;
/// while its max-abs error exceeds `eb` the bin widths are halved.
pub fn compress<T: Real>(grid: &TensorGrid<T>, eb: f64, codec: &dyn LosslessCodec) -> Result<Compressed> {
    if !(eb.is_finite() && eb > 0.0) {
        return Err(Error::InvalidBound(eb));
    }
    if grid.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("input holds non-finite values".into()));
    }
    let data = decompose(grid, None)?;
    let mut spec = QuantizerSpec::new(eb, data.levels())?;
    let as_f64: Vec<Vec<f64>> = data
        .classes()
        .iter()
        .map(|c| c.iter().map(|v| v.to_f64()).collect())
        .collect();
    for refinements in 0..=MAX_REFINEMENTS {
        let ints: Vec<Vec<i64>> = as_f64
            .iter()
            .zip(&spec.bin_widths)
            .map(|(c, &w)| quantize(c, w, eb))
            .collect::<Result<_>>()?;
        let decoded = reconstruct::<T>(grid.shape(), grid.coords(), data.levels(), &spec.bin_widths, &ints)?;
        let max_abs_error = grid
            .values()
            .iter()
            .zip(&decoded)
            .fold(0.0f64, |m, (a, b)| m.max((a.to_f64() - b.to_f64()).abs()));
        if max_abs_error <= eb {
            let mut stream = Vec::new();
            for c in &ints {
                for &q in c {
                    put_varint(&mut stream, q);
                }
            }
            let payload = codec.encode(&stream)?;
            let bytes = container::<T>(grid, &data, &spec, max_abs_error, codec.id(), stream.len(), &payload);
            let original_bytes = grid.len() * T::PRECISION.bytes();
            return Ok(Compressed {
                stats: CompressStats {
                    eb,
                    max_abs_error,
                    quantizer: spec,
                    refinements,
                    codec: codec.name().to_string(),
                    original_bytes,
                    compressed_bytes: bytes.len(),
                    ratio: original_bytes as f64 / bytes.len() as f64,
                },
                bytes,
            });
        }
        spec.halve();
    }
    Err(Error::InvalidBound(eb))
}

fn reconstruct<T: Real>(
    shape: &[usize],
    coords: &[Vec<f64>],
    levels: usize,
    widths: &[f64],
    ints: &[Vec<i64>],
) -> Result<Vec<T>> {
    let classes: Vec<Vec<T>> = ints
        .iter()
        .zip(widths)
        .map(|(q, &w)| dequantize(q, w).into_iter().map(T::from_f64).collect())
        .collect();
    let data = RefactoredData::from_parts(shape.to_vec(), coords.to_vec(), levels, classes)?;
    recompose_values(&data, None)
}

fn container<T: Real>(
    grid: &TensorGrid<T>,
    data: &RefactoredData<T>,
    spec: &QuantizerSpec,
    achieved: f64,
    codec: u8,
    raw_len: usize,
    payload: &[u8],
) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 256);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, T::PRECISION.bytes() as u8, codec, grid.ndims() as u8]);
    for &n in grid.shape() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for c in grid.coords() {
        for &x in c {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.extend_from_slice(&(data.levels() as u64).to_le_bytes());
    out.extend_from_slice(&spec.eb.to_le_bytes());
    out.extend_from_slice(&achieved.to_le_bytes());
    for w in &spec.bin_widths {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(raw_len as u64).to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| Error::CorruptFile {
            class: None,
            reason: "compressed stream is truncated".into(),
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}

struct Parsed {
    dtype: Precision,
    shape: Vec<usize>,
    coords: Vec<Vec<f64>>,
    levels: usize,
    eb: f64,
    achieved: f64,
    widths: Vec<f64>,
    codec: Box<dyn LosslessCodec>,
    ints: Vec<Vec<i64>>,
}

fn parse(bytes: &[u8]) -> Result<Parsed> {
    let bad = |reason: String| Error::CorruptFile { class: None, reason };
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(bad("not a compressed container".into()));
    }
    let head = c.take(4)?;
    let (version, dtype, codec, nd) = (head[0], head[1], head[2], head[3] as usize);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let dtype = Precision::from_bytes(dtype as usize).ok_or_else(|| bad(format!("dtype size {dtype}")))?;
    if nd == 0 || nd > crate::grid::MAX_DIMS {
        return Err(bad(format!("{nd} dimensions")));
    }
    let mut shape = Vec::with_capacity(nd);
    for _ in 0..nd {
        let n = c.u64()?;
        if !(3..=1 << 32).contains(&n) {
            return Err(bad(format!("dimension size {n}")));
        }
        shape.push(n as usize);
    }
    let mut coords = Vec::with_capacity(nd);
    for &n in &shape {
        coords.push((0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?);
    }
    let levels = c.u64()? as usize;
    if levels > 64 {
        return Err(bad(format!("level count {levels}")));
    }
    let eb = c.f64()?;
    let achieved = c.f64()?;
    let widths = (0..=levels).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let raw_len = c.u64()? as usize;
    let payload_len = c.u64()? as usize;
    let codec = codec_by_id(codec)?;
    let stream = codec.decode(c.take(payload_len)?)?;
    if stream.len() != raw_len {
        return Err(bad(format!("decoded {} bytes, expected {raw_len}", stream.len())));
    }
    let probe = RefactoredData::<f64>::from_parts(shape.clone(), coords.clone(), levels, Vec::new())
        .map_err(|e| bad(format!("inconsistent geometry: {e}")))?;
    let mut pos = 0;
    let mut ints = Vec::with_capacity(levels + 1);
    for k in 0..=levels {
        let n = probe.class_len(k);
        let mut q = Vec::with_capacity(n);
        for _ in 0..n {
            q.push(get_varint(&stream, &mut pos).ok_or_else(|| bad(format!("class {k} stream ends early")))?);
        }
        ints.push(q);
    }
    if pos != stream.len() {
        return Err(bad("trailing bytes after the last class".into()));
    }
    Ok(Parsed {
        dtype,
        shape,
        coords,
        levels,
        eb,
        achieved,
        widths,
        codec,
        ints,
    })
}

/// Inverse of [`compress`].
pub fn decompress<T: Real>(bytes: &[u8]) -> Result<(TensorGrid<T>, DecompressReport)> {
    let p = parse(bytes)?;
    if p.dtype != T::PRECISION {
        return Err(Error::InvalidArgument(format!(
            "container holds {} values, {} requested",
            p.dtype.name(),
            T::PRECISION.name()
        )));
    }
    let values = reconstruct::<T>(&p.shape, &p.coords, p.levels, &p.widths, &p.ints)?;
    let report = DecompressReport {
        eb: p.eb,
        max_abs_error: p.achieved,
        codec: p.codec.name().to_string(),
        levels: p.levels,
    };
    Ok((TensorGrid::new(p.shape, p.coords, values)?, report))
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyGrid {
    F32(TensorGrid<f32>),
    F64(TensorGrid<f64>),
}

/// Precision stored in a compressed container.
pub fn compressed_precision(bytes: &[u8]) -> Result<Precision> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::CorruptFile {
            class: None,
            reason: "not a compressed container".into(),
        });
    }
    Precision::from_bytes(bytes[5] as usize).ok_or_else(|| Error::CorruptFile {
        class: None,
        reason: format!("dtype size {}", bytes[5]),
    })
}

pub fn decompress_any(bytes: &[u8]) -> Result<(AnyGrid, DecompressReport)> {
    match compressed_precision(bytes)? {
        Precision::F32 => decompress::<f32>(bytes).map(|(g, r)| (AnyGrid::F32(g), r)),
        Precision::F64 => decompress::<f64>(bytes).map(|(g, r)| (AnyGrid::F64(g), r)),
    }
}
