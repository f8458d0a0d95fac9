use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

/// Pluggable lossless byte coder of the compression pipeline.
pub trait LosslessCodec: Send + Sync {
    /// Identifier stored in compressed containers.
    fn id(&self) -> u8;
    fn name(&self) -> &'static str;
    fn encode(&self, bytes: &[u8]) -> Result<Vec<u8>>;
    fn decode(&self, bytes: &[u8]) -> Result<Vec<u8>>;
}

/// Stores bytes unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullCodec;

impl LosslessCodec for NullCodec {
    fn id(&self) -> u8 {
        0
    }

    fn name(&self) -> &'static str {
        "null"
    }

    fn encode(&self, bytes: &[u8]) -> Result<Vec<u8>> {
        Ok(bytes.to_vec())
    }

    fn decode(&self, bytes: &[u8]) -> Result<Vec<u8>> {
        Ok(bytes.to_vec())
    }
}

/// Raw DEFLATE streams.
#[derive(Clone, Copy, Debug)]
pub struct DeflateCodec {
    pub level: u32,
}

impl Default for DeflateCodec {
    fn default() -> Self {
        Self { level: 6 }
    }
}

impl LosslessCodec for DeflateCodec {
    fn id(&self) -> u8 {
        1
    }

    fn name(&self) -> &'static str {
        "deflate"
    }

    fn encode(&self, bytes: &[u8]) -> Result<Vec<u8>> {
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::new(self.level.min(9)));
        enc.write_all(bytes)?;
        Ok(enc.finish()?)
    }

    fn decode(&self, bytes: &[u8]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        DeflateDecoder::new(bytes).read_to_end(&mut out).map_err(|e| Error::CorruptFile {
            class: None,
            reason: format!("deflate stream: {e}"),
        })?;
        Ok(out)
    }
}

pub fn codec_by_id(id: u8) -> Result<Box<dyn LosslessCodec>> {
    match id {
        0 => Ok(Box::new(NullCodec)),
        1 => Ok(Box::new(DeflateCodec::default())),
        _ => Err(Error::CorruptFile {
            class: None,
            reason: format!("unknown codec id {id}"),
        }),
    }
}

pub fn codec_by_name(name: &str) -> Result<Box<dyn LosslessCodec>> {
    match name {
        "null" | "none" | "store" => Ok(Box::new(NullCodec)),
        "deflate" | "zlib" => Ok(Box::new(DeflateCodec::default())),
        _ => Err(Error::InvalidArgument(format!(
            "unknown codec `{name}` (expected null or deflate)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codecs_round_trip() {
        let data: Vec<u8> = (0..4000u32).map(|i| (i % 7) as u8).collect();
        for c in [codec_by_name("null").unwrap(), codec_by_name("deflate").unwrap()] {
            let enc = c.encode(&data).unwrap();
            assert_eq!(c.decode(&enc).unwrap(), data);
            assert_eq!(codec_by_id(c.id()).unwrap().name(), c.name());
        }
        assert!(DeflateCodec::default().encode(&data).unwrap().len() < data.len() / 10);
        assert!(DeflateCodec::default().decode(&[0xff, 0xff, 0x00]).is_err());
    }
}
