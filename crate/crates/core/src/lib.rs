//! Packet number spaces for multipath QUIC.
//!
//! This crate implements both ways a multipath QUIC connection can number its
//! packets: a single packet number space shared by every path (SPNS) and one
//! independent space per path (MPNS). Around that it provides the pieces that
//! the choice touches:
//!
//! * [`receiver`]: per-path ACK thresholds and timers, ACK frames anchored at
//!   the largest packet received on the path, and the two-limit ACK range
//!   suppression.
//! * [`sender`]: per-path sending history, per-path packet- and time-threshold
//!   loss detection, per-path RTT sampling, and Cubic/NewReno controllers.
//! * [`scheduler`]: minRTT and round-robin path selection.
//! * [`netsim`] and [`experiment`]: a deterministic discrete-event simulator of
//!   a multipath transfer that reports the metrics used to compare the modes.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ack;
pub mod cc;
pub mod error;
pub mod experiment;
pub mod netsim;
pub mod ranges;
pub mod receiver;
pub mod scheduler;
pub mod sender;
pub mod time;
pub mod types;
pub mod varint;

pub use ack::{ack_frame_wire_size, AckFrame, ACK_DELAY_EXPONENT};
pub use error::{Error, Result};
pub use ranges::{AckRange, RangeSet};
pub use time::Timestamp;
pub use types::{PacketNumber, PathId, SpaceId, SpaceMode};
