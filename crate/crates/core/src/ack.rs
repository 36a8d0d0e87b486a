//! Abstract ACK frames and their encoded size.

use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::ranges::AckRange;
use crate::types::{PacketNumber, SpaceId, SpaceMode};
use crate::varint::varint_size;

/// ACK delay exponent; the encoded delay is `microseconds >> 3`.
pub const ACK_DELAY_EXPONENT: u32 = 3;

/// An ACK frame before serialization.
///
/// `ranges` is ordered from the largest packet number downwards; ranges
/// neither overlap nor touch.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AckFrame {
    /// Acknowledged space. Always `SpaceId(0)` under SPNS.
    pub space: SpaceId,
    pub largest_acked: PacketNumber,
    pub ack_delay: Duration,
    pub ranges: Vec<AckRange>,
}

impl AckFrame {
    pub fn new(space: SpaceId, ack_delay: Duration, ranges: Vec<AckRange>) -> Result<Self> {
        let largest_acked = ranges
            .first()
            .ok_or(Error::MalformedRanges("empty range list"))?
            .largest;
        let frame = AckFrame {
            space,
            largest_acked,
            ack_delay,
            ranges,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        validate_ranges(&self.ranges)?;
        if self.ranges[0].largest != self.largest_acked {
            return Err(Error::MalformedRanges("first range does not start at largest acked"));
        }
        Ok(())
    }

    pub fn acknowledges(&self, pn: u64) -> bool {
        self.ranges.iter().any(|r| r.contains(pn))
    }

    /// Encoded ACK Delay field value.
    pub fn encoded_ack_delay(&self) -> u64 {
        let us = u64::try_from(self.ack_delay.as_micros()).unwrap_or(u64::MAX);
        us >> ACK_DELAY_EXPONENT
    }
}

/// Checks that `ranges` is non-empty, descending, non-overlapping and
/// non-adjacent.
pub fn validate_ranges(ranges: &[AckRange]) -> Result<()> {
    if ranges.is_empty() {
        return Err(Error::MalformedRanges("empty range list"));
    }
    for r in ranges {
        if r.smallest > r.largest {
            return Err(Error::MalformedRanges("range smallest exceeds largest"));
        }
    }
    for w in ranges.windows(2) {
        // next.largest < prev.smallest - 1
        if w[1].largest.0.saturating_add(1) >= w[0].smallest.0 {
            return Err(Error::MalformedRanges("ranges overlap, touch or are not descending"));
        }
    }
    Ok(())
}

/// Size in bytes of `frame` on the wire.
///
/// Counts a one-byte frame type, Largest Acknowledged, ACK Delay, ACK Range
/// Count, First ACK Range, and a Gap/Length pair per further range. ECN counts
/// are never included. Under MPNS the frame additionally carries its space
/// identifier as one varint.
pub fn ack_frame_wire_size(frame: &AckFrame, mode: SpaceMode) -> Result<usize> {
    frame.validate()?;
    let ranges = &frame.ranges;
    let mut size = 1;
    size += varint_size(frame.largest_acked.0)?;
    size += varint_size(frame.encoded_ack_delay())?;
    size += varint_size(ranges.len() as u64 - 1)?;
    size += varint_size(ranges[0].length())?;
    for w in ranges.windows(2) {
        let gap = w[0].smallest.0 - w[1].largest.0 - 2;
        size += varint_size(gap)?;
        size += varint_size(w[1].length())?;
    }
    if mode == SpaceMode::Mpns {
        size += varint_size(u64::from(frame.space.0))?;
    }
    Ok(size)
}
