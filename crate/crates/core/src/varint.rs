//! QUIC variable-length integers (RFC 9000, section 16).
//!
//! Only the encoded length matters for ACK frame sizing; the encoder and
//! decoder exist so the length computation can be checked against real bytes.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest value representable as a varint, `2^62 - 1`.
pub const VARINT_MAX: u64 = (1 << 62) - 1;

/// Encoded length in bytes of `v`: 1, 2, 4 or 8.
pub fn varint_size(v: u64) -> Result<usize> {
    match v {
        0..=0x3f => Ok(1),
        0x40..=0x3fff => Ok(2),
        0x4000..=0x3fff_ffff => Ok(4),
        0x4000_0000..=VARINT_MAX => Ok(8),
        _ => Err(Error::VarintRange(v)),
    }
}

/// Appends the varint encoding of `v` to `out`.
pub fn encode(v: u64, out: &mut Vec<u8>) -> Result<()> {
    let len = varint_size(v)?;
    let tag: u64 = match len {
        1 => 0b00,
        2 => 0b01,
        4 => 0b10,
        _ => 0b11,
    };
    let word = v | (tag << (len * 8 - 2));
    out.extend_from_slice(&word.to_be_bytes()[8 - len..]);
    Ok(())
}

/// Decodes one varint from the front of `buf`, returning the value and the
/// number of bytes consumed. Returns `None` on truncated input.
pub fn decode(buf: &[u8]) -> Option<(u64, usize)> {
    let first = *buf.first()?;
    let len = 1usize << (first >> 6);
    let bytes = buf.get(..len)?;
    let mut v = u64::from(first & 0x3f);
    for b in &bytes[1..] {
        v = (v << 8) | u64::from(*b);
    }
    Some((v, len))
}
