//! Persistence and compression.
//!
//! `MGRF` files hold a refactored grid: a fixed little-endian header
//! (geometry, level count, per-class byte length and CRC32) followed by the
//! class payloads in order, so any prefix of classes can be read without
//! touching the rest. The compression pipeline decomposes, quantizes each
//! class uniformly and hands the bin indices to a lossless codec, storing
//! the result in an `MGRZ` container.

mod codec;
mod compress;
mod format;
mod quantize;

pub use codec::{codec_by_id, codec_by_name, DeflateCodec, LosslessCodec, NullCodec};
pub use compress::{
    compress, compressed_precision, decompress, decompress_any, AnyGrid, CompressStats, Compressed,
    DecompressReport,
};
pub use format::{
    decode_refactored, encode_refactored, read_header, read_refactored, read_refactored_any,
    write_refactored, AnyRefactored, ClassEntry, ReadOutcome, RefactorFileHeader,
};
pub use quantize::{dequantize, get_varint, put_varint, quantize, QuantizerSpec};
