//! Binary file formats.
//!
//! All integers are little-endian. Every file starts with a 4-byte magic and
//! a 1-byte version (currently 1).
//!
//! | file   | layout after the header                                        |
//! |--------|----------------------------------------------------------------|
//! | `HSTR` | `u64` bit length, then bits packed LSB-first into bytes        |
//! | `HSMP` | `u64` record count, then records of `u64` position + `u8` 0/1  |
//! | `HPOS` | `u64` record count, then `u64` positions                       |

use std::io::{Read, Write};

use hstream_core::density::PositionSet;
use hstream_core::gf2::BitVector;

use crate::error::{CliError, Result};

pub const STREAM_MAGIC: &[u8; 4] = b"HSTR";
pub const SAMPLES_MAGIC: &[u8; 4] = b"HSMP";
pub const POSITIONS_MAGIC: &[u8; 4] = b"HPOS";
pub const VERSION: u8 = 1;

fn malformed(msg: impl Into<String>) -> CliError {
    CliError::Malformed(msg.into())
}

fn write_header(out: &mut impl Write, magic: &[u8; 4], count: u64) -> Result<()> {
    out.write_all(magic)?;
    out.write_all(&[VERSION])?;
    out.write_all(&count.to_le_bytes())?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(malformed("unexpected end of file"));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<u64> {
        if self.take(4)? != magic {
            return Err(malformed(format!("expected magic {}", String::from_utf8_lossy(magic))));
        }
        let version = self.take(1)?[0];
        if version != VERSION {
            return Err(malformed(format!("unsupported version {version}")));
        }
        self.u64()
    }

    fn finish(&self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(malformed(format!("{} trailing bytes", self.buf.len())))
        }
    }
}

/// Bits packed LSB-first: bit `i` is bit `i % 8` of byte `i / 8`.
pub fn pack_bits(bits: &BitVector) -> Vec<u8> {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for i in bits.ones_indices() {
        bytes[i / 8] |= 1 << (i % 8);
    }
    bytes
}

pub fn write_stream(out: &mut impl Write, bits: &BitVector) -> Result<()> {
    write_header(out, STREAM_MAGIC, bits.len() as u64)?;
    out.write_all(&pack_bits(bits))?;
    Ok(())
}

pub fn parse_stream(data: &[u8]) -> Result<BitVector> {
    let mut r = Reader { buf: data };
    let len = r.header(STREAM_MAGIC)?;
    let len = usize::try_from(len).map_err(|_| malformed("bit length too large"))?;
    let bytes = r.take(len.div_ceil(8))?;
    r.finish()?;
    let bits: BitVector = (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
    if len % 8 != 0 && bytes[len / 8] >> (len % 8) != 0 {
        return Err(malformed("nonzero padding bits"));
    }
    Ok(bits)
}

pub fn write_samples(out: &mut impl Write, pairs: impl ExactSizeIterator<Item = (u64, bool)>) -> Result<()> {
    write_header(out, SAMPLES_MAGIC, pairs.len() as u64)?;
    for (position, value) in pairs {
        out.write_all(&position.to_le_bytes())?;
        out.write_all(&[u8::from(value)])?;
    }
    Ok(())
}

/// Sample records in file order, duplicates included.
pub fn parse_samples(data: &[u8]) -> Result<Vec<(u64, bool)>> {
    let mut r = Reader { buf: data };
    let count = r.header(SAMPLES_MAGIC)?;
    if (r.buf.len() as u64) < count.saturating_mul(9) {
        return Err(malformed("record count exceeds file size"));
    }
    let mut pairs = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let position = r.u64()?;
        let value = match r.take(1)?[0] {
            0 => false,
            1 => true,
            v => return Err(malformed(format!("sample value byte {v}"))),
        };
        pairs.push((position, value));
    }
    r.finish()?;
    Ok(pairs)
}

pub fn write_positions(out: &mut impl Write, d: &PositionSet) -> Result<()> {
    write_header(out, POSITIONS_MAGIC, d.len() as u64)?;
    for p in d.positions() {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a position set; the horizon is one past the largest position.
pub fn parse_positions(data: &[u8]) -> Result<PositionSet> {
    let mut r = Reader { buf: data };
    let count = r.header(POSITIONS_MAGIC)?;
    if (r.buf.len() as u64) < count.saturating_mul(8) {
        return Err(malformed("record count exceeds file size"));
    }
    let positions = (0..count).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    let horizon = positions.iter().max().map_or(0, |p| p + 1);
    Ok(PositionSet::new(positions, horizon)?)
}

/// Source bits from either ASCII `0`/`1` text (whitespace ignored) or an
/// `HSTR` file, told apart by the magic bytes.
pub fn parse_input_bits(data: &[u8]) -> Result<BitVector> {
    if data.starts_with(STREAM_MAGIC) {
        return parse_stream(data);
    }
    data.iter()
        .filter(|b| !b.is_ascii_whitespace())
        .map(|&b| match b {
            b'0' => Ok(false),
            b'1' => Ok(true),
            other => Err(malformed(format!("unexpected byte {other:#04x} in bit text"))),
        })
        .collect()
}

pub fn read_all(mut input: impl Read) -> Result<Vec<u8>> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn stream_layout_is_exact() {
        let mut out = Vec::new();
        write_stream(&mut out, &bv("0001")).unwrap();
        assert_eq!(out, [b'H', b'S', b'T', b'R', 1, 4, 0, 0, 0, 0, 0, 0, 0, 0b1000]);
        assert_eq!(parse_stream(&out).unwrap(), bv("0001"));
    }

    #[test]
    fn stream_rejects_damage() {
        let mut out = Vec::new();
        write_stream(&mut out, &bv("0001")).unwrap();
        let mut padded = out.clone();
        padded[13] |= 0x80;
        assert!(parse_stream(&padded).is_err());
        assert!(parse_stream(&out[..13]).is_err());
        let mut version = out.clone();
        version[4] = 2;
        assert!(parse_stream(&version).is_err());
        out.push(0);
        assert!(parse_stream(&out).is_err());
    }

    #[test]
    fn samples_layout_is_exact() {
        let mut out = Vec::new();
        write_samples(&mut out, [(5u64, true)].into_iter()).unwrap();
        assert_eq!(out, [b'H', b'S', b'M', b'P', 1, 1, 0, 0, 0, 0, 0, 0, 0, 5, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(parse_samples(&out).unwrap(), [(5, true)]);
        let mut bad = out.clone();
        bad[21] = 2;
        assert!(parse_samples(&bad).is_err());
        let mut huge = out;
        huge[5] = 0xff;
        assert!(parse_samples(&huge).is_err());
    }

    #[test]
    fn positions_round_trip() {
        let d = PositionSet::new(vec![0, 3, 9], 10).unwrap();
        let mut out = Vec::new();
        write_positions(&mut out, &d).unwrap();
        assert_eq!(&out[..5], b"HPOS\x01");
        assert_eq!(out.len(), 13 + 24);
        assert_eq!(parse_positions(&out).unwrap(), d);
    }

    #[test]
    fn input_bits_detection() {
        assert_eq!(parse_input_bits(b"1 0\n1\n").unwrap(), bv("101"));
        assert_eq!(parse_input_bits(b"").unwrap(), bv(""));
        assert!(parse_input_bits(b"10x").is_err());
        let mut packed = Vec::new();
        write_stream(&mut packed, &bv("110")).unwrap();
        assert_eq!(parse_input_bits(&packed).unwrap(), bv("110"));
    }
}
