//! Receiver side of a multipath connection: decides when and on which path
//! to acknowledge, and what goes into each ACK frame.
//!
//! Every path keeps its own ack-eliciting counter and ACK timer, and an ACK is
//! always sent back on the path whose arrivals triggered it. Frames start at
//! the largest packet number received *on that path*, so under SPNS the
//! sender's RTT sample for the frame measures that path alone.
//!
//! With suppression enabled, out-of-order arrivals no longer force an
//! immediate ACK and the number of ranges per frame is bounded by a soft
//! default limit, which may only be exceeded (up to a hard maximum) to cover
//! packets that arrived on the path since its previous ACK.

use alloc::vec::Vec;
use core::time::Duration;

use crate::ack::AckFrame;
use crate::error::{Error, Result};
use crate::ranges::{AckRange, RangeSet};
use crate::time::Timestamp;
use crate::types::{PacketNumber, PathId, SpaceId, SpaceMode};

/// Which packet an ACK frame written on a path starts from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AckAnchor {
    /// The largest packet number received on the path.
    #[default]
    PathLargest,
    /// The largest packet number received in the whole space, as in
    /// single-path QUIC. Only useful as an ablation under SPNS.
    ConnectionLargest,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecvConfig {
    /// Ack-eliciting packets received on a path before it must acknowledge.
    pub ack_eliciting_threshold: u32,
    pub max_ack_delay: Duration,
    pub suppression_enabled: bool,
    /// Soft cap on ranges per frame when suppression is enabled.
    pub default_limit: usize,
    /// Hard cap on ranges per frame. Also bounds unsuppressed frames, where
    /// the oldest ranges beyond it are dropped.
    pub maximum_limit: usize,
    pub anchor: AckAnchor,
    /// Stop reporting ranges that lie below every path's largest received
    /// packet once they have been acknowledged at least once.
    pub retire_settled_ranges: bool,
}

impl Default for RecvConfig {
    fn default() -> Self {
        RecvConfig {
            ack_eliciting_threshold: 2,
            max_ack_delay: Duration::from_millis(25),
            suppression_enabled: false,
            default_limit: 4,
            maximum_limit: 64,
            anchor: AckAnchor::PathLargest,
            retire_settled_ranges: true,
        }
    }
}

impl RecvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ack_eliciting_threshold == 0 {
            return Err(Error::Config("ack_eliciting_threshold must be at least 1"));
        }
        if self.default_limit == 0 {
            return Err(Error::Config("default_limit must be at least 1"));
        }
        if self.default_limit > self.maximum_limit {
            return Err(Error::Config("default_limit exceeds maximum_limit"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    /// Build an ACK frame now and send it on this path.
    EmitAckOnPath(PathId),
    /// Make sure [`ReceiverState::on_ack_timer`] runs for this path at the
    /// deadline.
    ArmTimer(PathId, Timestamp),
}

#[derive(Clone, Debug)]
pub struct PathRecvState {
    pub path: PathId,
    /// Largest packet number received on this path.
    pub largest_recv_pn: Option<PacketNumber>,
    pub largest_recv_time: Timestamp,
    pub ack_eliciting_since_ack: u32,
    pub ack_timer_deadline: Option<Timestamp>,
    /// Packets received on this path since its last ACK.
    pending: Vec<u64>,
}

impl PathRecvState {
    fn new(path: PathId) -> Self {
        PathRecvState {
            path,
            largest_recv_pn: None,
            largest_recv_time: Timestamp::ZERO,
            ack_eliciting_since_ack: 0,
            ack_timer_deadline: None,
            pending: Vec::new(),
        }
    }

    /// Packets that the next ACK on this path must cover.
    pub fn pending(&self) -> &[u64] {
        &self.pending
    }

    fn reset_ack_state(&mut self) {
        self.ack_eliciting_since_ack = 0;
        self.ack_timer_deadline = None;
    }
}

#[derive(Clone, Debug, Default)]
struct SpaceRecv {
    received: RangeSet,
    largest_time: Timestamp,
}

#[derive(Clone, Debug)]
pub struct ReceiverState {
    mode: SpaceMode,
    config: RecvConfig,
    spaces: Vec<SpaceRecv>,
    paths: Vec<PathRecvState>,
}

impl ReceiverState {
    pub fn new(mode: SpaceMode, paths: usize, config: RecvConfig) -> Result<Self> {
        config.validate()?;
        if paths == 0 {
            return Err(Error::Config("at least one path is required"));
        }
        Ok(ReceiverState {
            mode,
            config,
            spaces: (0..mode.space_count(paths)).map(|_| SpaceRecv::default()).collect(),
            paths: (0..paths).map(|i| PathRecvState::new(PathId(i as u32))).collect(),
        })
    }

    pub fn mode(&self) -> SpaceMode {
        self.mode
    }

    pub fn config(&self) -> &RecvConfig {
        &self.config
    }

    pub fn path(&self, path: PathId) -> Result<&PathRecvState> {
        self.paths.get(path.index()).ok_or(Error::UnknownPath(path))
    }

    pub fn paths(&self) -> &[PathRecvState] {
        &self.paths
    }

    /// Received packet numbers of a space.
    pub fn received(&self, space: SpaceId) -> Option<&RangeSet> {
        self.spaces.get(space.index()).map(|s| &s.received)
    }

    /// Handles an arriving packet and reports what the caller must do next.
    ///
    /// A duplicate is ignored and leaves counters and timers untouched.
    pub fn on_packet_received(
        &mut self,
        path: PathId,
        pn: PacketNumber,
        now: Timestamp,
        ack_eliciting: bool,
    ) -> Result<Option<Action>> {
        if path.index() >= self.paths.len() {
            return Err(Error::UnknownPath(path));
        }
        let space = &mut self.spaces[self.mode.space_of(path).index()];
        let out_of_order = match space.received.max() {
            Some(max) => pn.0 < max || pn.0 > max + 1,
            None => false,
        };
        if !space.received.insert(pn.0) {
            return Ok(None);
        }
        if space.received.max() == Some(pn.0) {
            space.largest_time = now;
        }

        let cfg = &self.config;
        let p = &mut self.paths[path.index()];
        if p.largest_recv_pn.is_none_or(|l| pn > l) {
            p.largest_recv_pn = Some(pn);
            p.largest_recv_time = now;
        }
        p.pending.push(pn.0);

        if !ack_eliciting {
            return Ok(None);
        }
        p.ack_eliciting_since_ack += 1;
        let immediate = out_of_order && !cfg.suppression_enabled;
        if immediate || p.ack_eliciting_since_ack >= cfg.ack_eliciting_threshold {
            p.reset_ack_state();
            return Ok(Some(Action::EmitAckOnPath(path)));
        }
        if p.ack_eliciting_since_ack == 1 {
            let deadline = now + cfg.max_ack_delay;
            p.ack_timer_deadline = Some(deadline);
            return Ok(Some(Action::ArmTimer(path, deadline)));
        }
        Ok(None)
    }

    /// Below this packet number every path of the space has moved on, so
    /// remaining holes can no longer be filled by reordering across paths.
    pub fn settle_floor(&self, space: SpaceId) -> Option<u64> {
        self.paths
            .iter()
            .filter(|p| self.mode.space_of(p.path) == space)
            .filter_map(|p| p.largest_recv_pn.map(|pn| pn.0))
            .min()
    }

    /// Holes in a space that reordering across paths may still fill: those
    /// above the settle floor.
    pub fn reorder_holes(&self, space: SpaceId) -> usize {
        match (self.spaces.get(space.index()), self.settle_floor(space)) {
            (Some(s), Some(floor)) => s.received.holes_above(floor),
            _ => 0,
        }
    }

    /// Writes the ACK frame for `path` and resets its counter and timer.
    pub fn build_ack_frame(&mut self, path: PathId, now: Timestamp) -> Result<AckFrame> {
        let p = self.path(path)?;
        let path_largest = p.largest_recv_pn.ok_or(Error::NothingReceived(path))?;
        let space_id = self.mode.space_of(path);
        let space = &self.spaces[space_id.index()];

        let (anchor, anchor_time) = match self.config.anchor {
            AckAnchor::PathLargest => (path_largest.0, p.largest_recv_time),
            AckAnchor::ConnectionLargest => (space.received.max().unwrap_or(path_largest.0), space.largest_time),
        };
        let floor = if self.config.retire_settled_ranges {
            self.settle_floor(space_id).unwrap_or(0)
        } else {
            0
        };

        let mut ranges: Vec<AckRange> = Vec::new();
        for r in space.received.iter_desc_from(anchor) {
            if r.largest.0 < floor {
                break;
            }
            ranges.push(r);
        }
        // Packets of this path that landed below the floor still need to be
        // acknowledged once.
        let mut late: Vec<u64> = p.pending.iter().copied().filter(|&pn| pn < floor).collect();
        late.sort_unstable_by(|a, b| b.cmp(a));
        for pn in late {
            if ranges.last().is_some_and(|r| r.contains(pn)) {
                continue;
            }
            if let Some(r) = space.received.range_containing(pn) {
                ranges.push(r);
            }
        }

        let ranges = if self.config.suppression_enabled {
            apply_range_limits(ranges, self.config.default_limit, self.config.maximum_limit, &p.pending)?
        } else {
            let mut ranges = ranges;
            ranges.truncate(self.config.maximum_limit);
            ranges
        };

        let frame = AckFrame::new(space_id, now - anchor_time, ranges)?;
        let p = &mut self.paths[path.index()];
        p.pending.clear();
        p.reset_ack_state();
        Ok(frame)
    }

    /// Fires the ACK timer of `path`.
    pub fn on_ack_timer(&mut self, path: PathId, now: Timestamp) -> Result<AckFrame> {
        let p = self.path(path)?;
        match p.ack_timer_deadline {
            Some(deadline) if deadline <= now && p.ack_eliciting_since_ack > 0 => self.build_ack_frame(path, now),
            _ => Err(Error::TimerNotExpired(path)),
        }
    }
}

/// Bounds the number of ranges in a frame.
///
/// Keeps the longest prefix of at most `default_limit` ranges, extended just
/// far enough to include every packet in `must_cover`, but never beyond
/// `maximum_limit` ranges.
pub fn apply_range_limits(
    mut ranges: Vec<AckRange>,
    default_limit: usize,
    maximum_limit: usize,
    must_cover: &[u64],
) -> Result<Vec<AckRange>> {
    if default_limit == 0 {
        return Err(Error::Config("default_limit must be at least 1"));
    }
    if default_limit > maximum_limit {
        return Err(Error::Config("default_limit exceeds maximum_limit"));
    }
    let mut keep = ranges.len().min(default_limit);
    for &pn in must_cover {
        if let Some(i) = ranges.iter().position(|r| r.contains(pn)) {
            keep = keep.max(i + 1);
        }
    }
    ranges.truncate(keep.min(maximum_limit));
    Ok(ranges)
}
