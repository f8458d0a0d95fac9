use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::real::{Precision, Real};
use crate::refactor::RefactoredData;

pub const MAGIC: &[u8; 4] = b"MGRF";
pub const VERSION: u8 = 1;
const LITTLE_ENDIAN: u8 = 0;

/// Byte length and CRC32 of one class payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub byte_len: u64,
    pub crc32: u32,
}

/// Everything in front of the class payloads.
#[derive(Clone, Debug, PartialEq)]
pub struct RefactorFileHeader {
    pub version: u8,
    pub dtype: Precision,
    pub shape: Vec<usize>,
    pub coords: Vec<Vec<f64>>,
    pub levels: usize,
    pub classes: Vec<ClassEntry>,
}

impl RefactorFileHeader {
    /// Encoded header size in bytes.
    pub fn byte_len(&self) -> u64 {
        let nd = self.shape.len() as u64;
        let ncoords: u64 = self.shape.iter().map(|&n| n as u64).sum();
        8 + 8 * nd + 8 * ncoords + 8 + 12 * self.classes.len() as u64
    }

    /// Offset of class `k`'s payload from the start of the file.
    pub fn payload_offset(&self, k: usize) -> u64 {
        self.byte_len() + self.classes[..k].iter().map(|c| c.byte_len).sum::<u64>()
    }

    pub fn total_len(&self) -> u64 {
        self.payload_offset(self.classes.len())
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[
            self.version,
            LITTLE_ENDIAN,
            self.dtype.bytes() as u8,
            self.shape.len() as u8,
        ]);
        for &n in &self.shape {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for c in &self.coords {
            for &x in c {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.levels as u64).to_le_bytes());
        for e in &self.classes {
            out.extend_from_slice(&e.byte_len.to_le_bytes());
            out.extend_from_slice(&e.crc32.to_le_bytes());
        }
    }
}

fn corrupt(class: Option<usize>, reason: impl Into<String>) -> Error {
    Error::CorruptFile {
        class,
        reason: reason.into(),
    }
}

/// Reader that counts consumed bytes.
struct Counting<R> {
    inner: R,
    count: u64,
}

impl<R: Read> Counting<R> {
    fn fill(&mut self, buf: &mut [u8]) -> std::io::Result<()> {
        self.inner.read_exact(buf)?;
        self.count += buf.len() as u64;
        Ok(())
    }

    fn header<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.fill(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => corrupt(None, "truncated header"),
            _ => e.into(),
        })?;
        Ok(b)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.header()?))
    }
}

fn build_header<T: Real>(data: &RefactoredData<T>) -> Result<RefactorFileHeader> {
    if !data.is_complete() {
        return Err(Error::InvalidArgument(format!(
            "only {} of {} classes present; a file stores all of them",
            data.classes_available(),
            data.levels() + 1
        )));
    }
    if data.shape().iter().any(|&n| n < 3) {
        return Err(Error::InvalidGrid(format!(
            "shape {:?} has an axis below 3 nodes, which the file format cannot hold",
            data.shape()
        )));
    }
    let classes = (0..=data.levels())
        .map(|k| {
            let bytes = data.class_bytes(k).expect("complete data");
            ClassEntry {
                byte_len: bytes.len() as u64,
                crc32: crc32fast::hash(&bytes),
            }
        })
        .collect();
    Ok(RefactorFileHeader {
        version: VERSION,
        dtype: T::PRECISION,
        shape: data.shape().to_vec(),
        coords: data.coords().to_vec(),
        levels: data.levels(),
        classes,
    })
}

/// The complete file image of `data`.
pub fn encode_refactored<T: Real>(data: &RefactoredData<T>) -> Result<Vec<u8>> {
    let header = build_header(data)?;
    let mut out = Vec::with_capacity(header.total_len() as usize);
    header.encode(&mut out);
    for k in 0..=data.levels() {
        out.extend_from_slice(&data.class_bytes(k).expect("complete data"));
    }
    Ok(out)
}

/// Writes `data` to `path`; returns the number of bytes written.
pub fn write_refactored<T: Real>(data: &RefactoredData<T>, path: impl AsRef<Path>) -> Result<u64> {
    let bytes = encode_refactored(data)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(bytes.len() as u64)
}

fn read_header_from<R: Read>(r: &mut Counting<R>) -> Result<RefactorFileHeader> {
    let magic: [u8; 4] = r.header()?;
    if &magic != MAGIC {
        return Err(corrupt(None, format!("bad magic {magic:?}")));
    }
    let [version, endian, dtype, ndims] = r.header::<4>()?;
    if version != VERSION {
        return Err(corrupt(None, format!("unsupported version {version}")));
    }
    if endian != LITTLE_ENDIAN {
        return Err(corrupt(None, format!("unsupported endianness flag {endian}")));
    }
    let dtype = Precision::from_bytes(dtype as usize)
        .ok_or_else(|| corrupt(None, format!("unknown dtype size {dtype}")))?;
    if ndims == 0 || ndims as usize > crate::grid::MAX_DIMS {
        return Err(corrupt(None, format!("{ndims} dimensions")));
    }
    let mut shape = Vec::with_capacity(ndims as usize);
    for _ in 0..ndims {
        let n = r.u64()?;
        if !(3..=1 << 40).contains(&n) {
            return Err(corrupt(None, format!("dimension size {n}")));
        }
        shape.push(n as usize);
    }
    let mut coords = Vec::with_capacity(shape.len());
    for &n in &shape {
        let mut c = Vec::with_capacity(n);
        for _ in 0..n {
            c.push(f64::from_le_bytes(r.header()?));
        }
        coords.push(c);
    }
    let levels = r.u64()? as usize;
    if levels > 64 {
        return Err(corrupt(None, format!("level count {levels}")));
    }
    let mut classes = Vec::with_capacity(levels + 1);
    for _ in 0..=levels {
        let byte_len = r.u64()?;
        let crc32 = u32::from_le_bytes(r.header()?);
        classes.push(ClassEntry { byte_len, crc32 });
    }
    let header = RefactorFileHeader {
        version,
        dtype,
        shape,
        coords,
        levels,
        classes,
    };
    // geometry must imply the recorded class sizes
    let probe = RefactoredData::<f64>::from_parts(header.shape.clone(), header.coords.clone(), levels, Vec::new())
        .map_err(|e| corrupt(None, format!("inconsistent geometry: {e}")))?;
    let mut total = 0;
    for (k, e) in header.classes.iter().enumerate() {
        let expected = (probe.class_len(k) * dtype.bytes()) as u64;
        if e.byte_len != expected {
            return Err(corrupt(
                Some(k),
                format!("byte length {} but geometry implies {expected}", e.byte_len),
            ));
        }
        total += probe.class_len(k);
    }
    if total != header.shape.iter().product::<usize>() {
        return Err(corrupt(None, "class sizes do not add up to the grid"));
    }
    Ok(header)
}

/// Reads only the header of `path`.
pub fn read_header(path: impl AsRef<Path>) -> Result<RefactorFileHeader> {
    let mut r = Counting {
        inner: BufReader::new(File::open(path)?),
        count: 0,
    };
    read_header_from(&mut r)
}

/// Classes read from a stream plus the number of bytes consumed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadOutcome<T> {
    pub data: RefactoredData<T>,
    pub header: RefactorFileHeader,
    pub bytes_read: u64,
}

/// Decodes the header and classes `0..=k` (all when `None`) from `reader`,
/// consuming nothing past class `k`.
pub fn decode_refactored<T: Real, R: Read>(reader: R, classes: Option<usize>) -> Result<ReadOutcome<T>> {
    let mut r = Counting {
        inner: reader,
        count: 0,
    };
    let header = read_header_from(&mut r)?;
    if header.dtype != T::PRECISION {
        return Err(Error::InvalidArgument(format!(
            "file holds {} values, {} requested",
            header.dtype.name(),
            T::PRECISION.name()
        )));
    }
    let k = classes.unwrap_or(header.levels);
    if k > header.levels {
        return Err(Error::InvalidLevel {
            level: k,
            expected: format!("0..={} classes", header.levels),
        });
    }
    let width = T::PRECISION.bytes();
    let mut out = Vec::with_capacity(k + 1);
    for (c, entry) in header.classes.iter().enumerate().take(k + 1) {
        let mut buf = vec![0u8; entry.byte_len as usize];
        if let Err(e) = r.fill(&mut buf) {
            return Err(match e.kind() {
                std::io::ErrorKind::UnexpectedEof => Error::MissingClass {
                    requested: k,
                    available: c,
                },
                _ => e.into(),
            });
        }
        let crc = crc32fast::hash(&buf);
        if crc != entry.crc32 {
            return Err(corrupt(
                Some(c),
                format!("checksum {crc:08x} does not match stored {:08x}", entry.crc32),
            ));
        }
        out.push(buf.chunks_exact(width).map(T::read_le).collect());
    }
    let data = RefactoredData::from_parts(header.shape.clone(), header.coords.clone(), header.levels, out)
        .map_err(|e| corrupt(None, e.to_string()))?;
    Ok(ReadOutcome {
        data,
        header,
        bytes_read: r.count,
    })
}

/// Reads classes `0..=k` (all when `None`) of the file at `path`.
pub fn read_refactored<T: Real>(path: impl AsRef<Path>, classes: Option<usize>) -> Result<RefactoredData<T>> {
    let f = BufReader::new(File::open(path)?);
    decode_refactored(f, classes).map(|o| o.data)
}

/// A file's contents in whichever precision it was written.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyRefactored {
    F32(RefactoredData<f32>),
    F64(RefactoredData<f64>),
}

pub fn read_refactored_any(path: impl AsRef<Path>, classes: Option<usize>) -> Result<AnyRefactored> {
    let path = path.as_ref();
    match read_header(path)?.dtype {
        Precision::F32 => read_refactored(path, classes).map(AnyRefactored::F32),
        Precision::F64 => read_refactored(path, classes).map(AnyRefactored::F64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TensorGrid;

    fn sample() -> RefactoredData<f64> {
        let g = TensorGrid::from_fn(vec![9, 5], vec![crate::grid::uniform_coords(9), vec![0.0, 0.5, 1.5, 2.0, 4.0]], |x| {
            x[0] * x[0] - x[1]
        })
        .unwrap();
        crate::refactor::decompose(&g, None).unwrap()
    }

    #[test]
    fn header_layout() {
        let d = sample();
        let bytes = encode_refactored(&d).unwrap();
        assert_eq!(&bytes[..4], b"MGRF");
        assert_eq!(&bytes[4..8], &[1, 0, 8, 2]);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 9);
        let h = decode_refactored::<f64, _>(&bytes[..], None).unwrap().header;
        assert_eq!(h.total_len(), bytes.len() as u64);
        assert_eq!(h.levels, 2);
    }

    #[test]
    fn prefix_read_stops_at_class() {
        let d = sample();
        let bytes = encode_refactored(&d).unwrap();
        let o = decode_refactored::<f64, _>(&bytes[..], Some(0)).unwrap();
        assert_eq!(o.bytes_read, o.header.payload_offset(1));
        assert_eq!(o.data.classes_available(), 1);
        // the rest of the file may be missing altogether
        let cut = &bytes[..o.header.payload_offset(1) as usize];
        assert!(decode_refactored::<f64, _>(cut, Some(0)).is_ok());
        assert!(matches!(
            decode_refactored::<f64, _>(cut, Some(2)),
            Err(Error::MissingClass { requested: 2, available: 1 })
        ));
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut bytes = encode_refactored(&sample()).unwrap();
        bytes[4] = 2;
        assert!(matches!(decode_refactored::<f64, _>(&bytes[..], None), Err(Error::CorruptFile { class: None, .. })));
        bytes[4] = 1;
        bytes[0] = b'X';
        assert!(matches!(decode_refactored::<f64, _>(&bytes[..], None), Err(Error::CorruptFile { class: None, .. })));
    }
}
