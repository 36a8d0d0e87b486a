use thiserror::Error;

use crate::types::{PacketNumber, PathId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value does not fit in a QUIC variable-length integer.
    #[error("value {0} exceeds the varint range (2^62 - 1)")]
    VarintRange(u64),

    /// An ACK frame or range list violates its ordering invariants.
    #[error("malformed ack ranges: {0}")]
    MalformedRanges(&'static str),

    #[error("unknown path {0}")]
    UnknownPath(PathId),

    #[error("no packet has been received on path {0}")]
    NothingReceived(PathId),

    #[error("ack timer on path {0} has not expired")]
    TimerNotExpired(PathId),

    #[error("invalid configuration: {0}")]
    Config(&'static str),

    /// The peer acknowledged a packet number that was never sent.
    #[error("acknowledgement of unsent packet {0}")]
    AckOfUnsent(PacketNumber),

    /// A packet number was recorded twice by the same numbering authority.
    #[error("packet number {0} already sent")]
    DuplicatePacketNumber(PacketNumber),

    #[error("RTT sample must be positive")]
    NonPositiveRtt,

    /// An event was scheduled before the current simulation time.
    #[error("event scheduled in the past")]
    EventInPast,

    #[error("invalid trace: {0}")]
    Trace(&'static str),
}
