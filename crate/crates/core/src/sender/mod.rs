//! Sender side of a multipath connection: packet numbering, per-path sending
//! history, loss detection, RTT sampling and congestion control.
//!
//! Loss detection never compares packet numbers across paths. Each path keeps
//! the ordered list of packets it sent, and the packet threshold counts
//! positions in that list, so SPNS numbering gaps caused by the other path do
//! not look like losses.
//!
//! RTT samples are taken per arrival path: a frame yields a sample when its
//! largest acknowledged packet is new to the ACKs received on that path, even
//! if a faster path's ACK already covered the packet. Under SPNS the sample
//! belongs to the arrival path only if the packet was also sent there.

pub mod rtt;

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::ack::AckFrame;
use crate::cc::{CcConfig, CongestionController, Controller};
use crate::error::{Error, Result};
use crate::ranges::RangeSet;
use crate::time::Timestamp;
use crate::types::{PacketNumber, PathId, SpaceId, SpaceMode};
use rtt::RttEstimator;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SentPacketRecord {
    pub pn: PacketNumber,
    pub path: PathId,
    pub send_time: Timestamp,
    pub size: u64,
    pub ack_eliciting: bool,
    /// Position of the packet in its path's sending order. Assigned by
    /// [`Sender::on_packet_sent`].
    pub path_history_index: u64,
    /// Application data chunk carried by the packet, if any.
    pub data: Option<u64>,
}

impl SentPacketRecord {
    pub fn new(pn: PacketNumber, path: PathId, send_time: Timestamp, size: u64) -> Self {
        SentPacketRecord {
            pn,
            path,
            send_time,
            size,
            ack_eliciting: true,
            path_history_index: 0,
            data: None,
        }
    }

    pub fn with_data(mut self, chunk: u64) -> Self {
        self.data = Some(chunk);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossConfig {
    pub packet_threshold: u64,
    pub time_threshold_num: u32,
    pub time_threshold_den: u32,
    pub granularity: Duration,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            packet_threshold: 3,
            time_threshold_num: 9,
            time_threshold_den: 8,
            granularity: Duration::from_millis(1),
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.packet_threshold == 0 {
            return Err(Error::Config("packet_threshold must be at least 1"));
        }
        if self.time_threshold_den == 0 || self.time_threshold_num < self.time_threshold_den {
            return Err(Error::Config("time threshold must be a ratio of at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PathSendState {
    pub path: PathId,
    history: Vec<PacketNumber>,
    /// History index to packet number, for packets neither acked nor lost.
    unacked: BTreeMap<u64, PacketNumber>,
    largest_acked_on_path: Option<PacketNumber>,
    largest_acked_index: Option<u64>,
    pub rtt: RttEstimator,
    pub bytes_in_flight: u64,
    pub cc: Controller,
    pub validated: bool,
    last_ack_eliciting_sent: Option<Timestamp>,
}

impl PathSendState {
    pub fn new(path: PathId, cc: &CcConfig) -> Self {
        PathSendState {
            path,
            history: Vec::new(),
            unacked: BTreeMap::new(),
            largest_acked_on_path: None,
            largest_acked_index: None,
            rtt: RttEstimator::new(),
            bytes_in_flight: 0,
            cc: cc.build(),
            validated: true,
            last_ack_eliciting_sent: None,
        }
    }

    pub fn history(&self) -> &[PacketNumber] {
        &self.history
    }

    pub fn unacked(&self) -> impl Iterator<Item = PacketNumber> + '_ {
        self.unacked.values().copied()
    }

    pub fn largest_acked_on_path(&self) -> Option<PacketNumber> {
        self.largest_acked_on_path
    }

    pub fn cwnd(&self) -> u64 {
        self.cc.cwnd()
    }

    /// Whether a packet of `size` bytes fits in the congestion window.
    pub fn can_send(&self, size: u64) -> bool {
        self.validated && self.bytes_in_flight + size <= self.cc.cwnd()
    }
}

/// An RTT measurement taken from one ACK frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RttSample {
    /// Path the sample was attributed to, or `None` when the largest
    /// acknowledged packet went out on a different path than the ACK came
    /// back on. Such samples are recorded but never smoothed.
    pub path: Option<PathId>,
    pub arrival_path: PathId,
    /// Path the largest acknowledged packet was sent on.
    pub largest_sent_on: PathId,
    pub latest: Duration,
    pub ack_delay: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossReason {
    PacketThreshold,
    TimeThreshold,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AckProcessResult {
    pub newly_acked: Vec<SentPacketRecord>,
    pub rtt_sample: Option<RttSample>,
    pub lost: Vec<(SentPacketRecord, LossReason)>,
    /// Packets acknowledged after being declared lost.
    pub spurious: Vec<PacketNumber>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SenderStats {
    pub packets_sent: u64,
    pub bytes_sent: u64,
    pub packet_threshold_losses: u64,
    pub time_threshold_losses: u64,
    pub spurious_losses: u64,
    pub pto_count: u64,
    pub rtt_samples: u64,
    pub mixed_rtt_samples: u64,
}

#[derive(Clone, Debug, Default)]
struct SpaceSend {
    next_pn: u64,
    sent: RangeSet,
    /// Packets neither acked nor lost.
    outstanding: BTreeMap<u64, SentPacketRecord>,
    /// Packets declared lost and not acknowledged since.
    lost: BTreeMap<u64, SentPacketRecord>,
    /// Send path and time of every packet, for RTT samples on packets that
    /// another path's ACK already covered.
    sent_on: BTreeMap<u64, (PathId, Timestamp)>,
    non_eliciting: BTreeSet<u64>,
}

#[derive(Clone, Debug)]
pub struct Sender {
    mode: SpaceMode,
    loss: LossConfig,
    /// The peer's maximum ACK delay, used by the probe timeout.
    max_ack_delay: Duration,
    spaces: Vec<SpaceSend>,
    paths: Vec<PathSendState>,
    /// Per arrival path and space: everything ACK frames received on that
    /// path have covered.
    acked_via: Vec<Vec<RangeSet>>,
    retransmit: VecDeque<u64>,
    stats: SenderStats,
}

impl Sender {
    pub fn new(
        mode: SpaceMode,
        paths: usize,
        cc: &CcConfig,
        loss: LossConfig,
        max_ack_delay: Duration,
    ) -> Result<Self> {
        if paths == 0 {
            return Err(Error::Config("at least one path is required"));
        }
        loss.validate()?;
        Ok(Sender {
            mode,
            loss,
            max_ack_delay,
            spaces: (0..mode.space_count(paths)).map(|_| SpaceSend::default()).collect(),
            paths: (0..paths).map(|i| PathSendState::new(PathId(i as u32), cc)).collect(),
            acked_via: vec![vec![RangeSet::new(); mode.space_count(paths)]; paths],
            retransmit: VecDeque::new(),
            stats: SenderStats::default(),
        })
    }

    pub fn mode(&self) -> SpaceMode {
        self.mode
    }

    pub fn paths(&self) -> &[PathSendState] {
        &self.paths
    }

    pub fn path(&self, path: PathId) -> Result<&PathSendState> {
        self.paths.get(path.index()).ok_or(Error::UnknownPath(path))
    }

    pub fn stats(&self) -> &SenderStats {
        &self.stats
    }

    fn space_mut(&mut self, path: PathId) -> Result<&mut SpaceSend> {
        if path.index() >= self.paths.len() {
            return Err(Error::UnknownPath(path));
        }
        Ok(&mut self.spaces[self.mode.space_of(path).index()])
    }

    /// Allocates the next packet number for a packet on `path`.
    pub fn next_packet_number(&mut self, path: PathId) -> Result<PacketNumber> {
        let space = self.space_mut(path)?;
        let pn = space.next_pn;
        space.next_pn += 1;
        Ok(PacketNumber(pn))
    }

    /// Records a sent packet and returns its path history index.
    pub fn on_packet_sent(&mut self, mut record: SentPacketRecord) -> Result<u64> {
        let space = self.space_mut(record.path)?;
        let pn = record.pn.value();
        if pn > PacketNumber::MAX.value() || !space.sent.insert(pn) {
            return Err(Error::DuplicatePacketNumber(record.pn));
        }
        space.next_pn = space.next_pn.max(pn + 1);
        space.sent_on.insert(pn, (record.path, record.send_time));
        if !record.ack_eliciting {
            space.non_eliciting.insert(pn);
        }

        let path = &mut self.paths[record.path.index()];
        let index = path.history.len() as u64;
        record.path_history_index = index;
        path.history.push(record.pn);
        path.unacked.insert(index, record.pn);
        if record.ack_eliciting {
            path.bytes_in_flight += record.size;
            path.last_ack_eliciting_sent = Some(record.send_time);
        }
        path.cc.on_packet_sent(record.size, record.send_time);
        self.stats.packets_sent += 1;
        self.stats.bytes_sent += record.size;
        let space = &mut self.spaces[self.mode.space_of(record.path).index()];
        space.outstanding.insert(pn, record);
        Ok(index)
    }

    /// Numbers and records an ack-eliciting packet carrying `data`.
    pub fn send(&mut self, path: PathId, now: Timestamp, size: u64, data: Option<u64>) -> Result<PacketNumber> {
        let pn = self.next_packet_number(path)?;
        let mut record = SentPacketRecord::new(pn, path, now, size);
        record.data = data;
        self.on_packet_sent(record)?;
        Ok(pn)
    }

    pub fn on_ack_received(
        &mut self,
        arrival_path: PathId,
        frame: &AckFrame,
        now: Timestamp,
    ) -> Result<AckProcessResult> {
        if arrival_path.index() >= self.paths.len() {
            return Err(Error::UnknownPath(arrival_path));
        }
        frame.validate()?;
        let space_index = frame.space.index();
        if space_index >= self.spaces.len() {
            return Err(Error::UnknownPath(PathId(frame.space.0)));
        }
        let space = &mut self.spaces[space_index];
        for r in &frame.ranges {
            match space.sent.range_containing(r.largest.value()) {
                Some(s) if s.smallest <= r.smallest => {}
                _ => return Err(Error::AckOfUnsent(r.largest)),
            }
        }

        let mut result = AckProcessResult {
            rtt_sample: self.rtt_sample(arrival_path, frame, now)?,
            ..AckProcessResult::default()
        };
        let space = &mut self.spaces[space_index];
        for r in &frame.ranges {
            let span = r.smallest.value()..=r.largest.value();
            let acked: Vec<u64> = space.outstanding.range(span.clone()).map(|(&pn, _)| pn).collect();
            for pn in acked {
                if let Some(rec) = space.outstanding.remove(&pn) {
                    result.newly_acked.push(rec);
                }
            }
            let late: Vec<u64> = space.lost.range(span).map(|(&pn, _)| pn).collect();
            for pn in late {
                if let Some(rec) = space.lost.remove(&pn) {
                    result.spurious.push(rec.pn);
                    if let Some(chunk) = rec.data {
                        self.retransmit.retain(|&c| c != chunk);
                    }
                    let path = &mut self.paths[rec.path.index()];
                    note_largest_acked(path, &rec);
                }
            }
        }
        self.stats.spurious_losses += result.spurious.len() as u64;
        result.newly_acked.sort_by_key(|r| r.pn);

        let mut affected: Vec<PathId> = Vec::new();
        for rec in &result.newly_acked {
            let path = &mut self.paths[rec.path.index()];
            path.unacked.remove(&rec.path_history_index);
            note_largest_acked(path, rec);
            if rec.ack_eliciting {
                path.bytes_in_flight -= rec.size;
                path.cc.on_ack(rec.size, rec.send_time, now, &path.rtt);
            }
            if !affected.contains(&rec.path) {
                affected.push(rec.path);
            }
        }
        for path in affected {
            result.lost.extend(self.detect_losses(path, now)?);
        }
        Ok(result)
    }

    /// Takes an RTT sample if the frame's largest acknowledged packet is new
    /// to ACKs received on `arrival_path` and the frame newly covers, for that
    /// path, at least one ack-eliciting packet. Whether another path's ACK
    /// covered the packet first does not matter.
    fn rtt_sample(&mut self, arrival_path: PathId, frame: &AckFrame, now: Timestamp) -> Result<Option<RttSample>> {
        let space_index = frame.space.index();
        let space = &self.spaces[space_index];
        let seen = &mut self.acked_via[arrival_path.index()][space_index];
        let largest = frame.largest_acked.value();
        let fresh = !seen.contains(largest)
            && frame.ranges.iter().any(|r| {
                let (lo, hi) = (r.smallest.value(), r.largest.value());
                let new = r.count() - seen.count_within(lo, hi);
                let new_non_eliciting = space
                    .non_eliciting
                    .range(lo..=hi)
                    .filter(|pn| !seen.contains(**pn))
                    .count() as u64;
                new > new_non_eliciting
            });
        for r in &frame.ranges {
            seen.insert_range(r.largest.value(), r.smallest.value());
        }
        let Some(&(sent_path, send_time)) = space.sent_on.get(&largest).filter(|_| fresh) else {
            return Ok(None);
        };
        let latest = now.saturating_duration_since(send_time);
        if latest.is_zero() {
            return Ok(None);
        }
        let owner = match self.mode {
            SpaceMode::Spns => (sent_path == arrival_path).then_some(arrival_path),
            SpaceMode::Mpns => Some(PathId(frame.space.0)),
        };
        match owner {
            Some(p) => {
                self.paths[p.index()].rtt.update(latest, frame.ack_delay)?;
                self.stats.rtt_samples += 1;
            }
            None => self.stats.mixed_rtt_samples += 1,
        }
        Ok(Some(RttSample {
            path: owner,
            arrival_path,
            largest_sent_on: sent_path,
            latest,
            ack_delay: frame.ack_delay,
        }))
    }

    fn loss_delay(&self, path: &PathSendState) -> Duration {
        let rtt = path.rtt.smoothed_or_initial().max(path.rtt.latest());
        let d = rtt * self.loss.time_threshold_num / self.loss.time_threshold_den;
        d.max(self.loss.granularity)
    }

    /// Declares lost the packets on `path` that trail its largest acknowledged
    /// packet by the packet threshold in sending order, or by the time
    /// threshold in send time.
    pub fn detect_losses(&mut self, path_id: PathId, now: Timestamp) -> Result<Vec<(SentPacketRecord, LossReason)>> {
        let path = self.paths.get(path_id.index()).ok_or(Error::UnknownPath(path_id))?;
        let Some(largest_index) = path.largest_acked_index else {
            return Ok(Vec::new());
        };
        let loss_delay = self.loss_delay(path);
        let lost_send_time = now.checked_sub(loss_delay);
        let space_index = self.mode.space_of(path_id).index();

        let mut lost = Vec::new();
        for (&index, pn) in path.unacked.range(..largest_index) {
            let rec = &self.spaces[space_index].outstanding[&pn.value()];
            if index + self.loss.packet_threshold <= largest_index {
                lost.push((rec.clone(), LossReason::PacketThreshold));
            } else if lost_send_time.is_some_and(|t| rec.send_time <= t) {
                lost.push((rec.clone(), LossReason::TimeThreshold));
            }
        }
        if lost.is_empty() {
            return Ok(lost);
        }

        let path = &mut self.paths[path_id.index()];
        let space = &mut self.spaces[space_index];
        let mut newest_sent = Timestamp::ZERO;
        for (rec, reason) in &lost {
            path.unacked.remove(&rec.path_history_index);
            space.outstanding.remove(&rec.pn.value());
            space.lost.insert(rec.pn.value(), rec.clone());
            if rec.ack_eliciting {
                path.bytes_in_flight -= rec.size;
            }
            newest_sent = newest_sent.max(rec.send_time);
            if let Some(chunk) = rec.data {
                self.retransmit.push_back(chunk);
            }
            match reason {
                LossReason::PacketThreshold => self.stats.packet_threshold_losses += 1,
                LossReason::TimeThreshold => self.stats.time_threshold_losses += 1,
            }
        }
        path.cc.on_congestion_event(newest_sent, now);
        Ok(lost)
    }

    /// When the time threshold will next declare a packet on `path` lost.
    pub fn loss_time(&self, path_id: PathId) -> Option<Timestamp> {
        let path = self.paths.get(path_id.index())?;
        let largest_index = path.largest_acked_index?;
        let (_, pn) = path.unacked.range(..largest_index).next()?;
        let space = &self.spaces[self.mode.space_of(path_id).index()];
        Some(space.outstanding[&pn.value()].send_time + self.loss_delay(path))
    }

    /// Probe timeout for `path`, armed while it has ack-eliciting data in flight.
    pub fn pto_deadline(&self, path_id: PathId) -> Option<Timestamp> {
        let path = self.paths.get(path_id.index())?;
        if path.bytes_in_flight == 0 {
            return None;
        }
        let last = path.last_ack_eliciting_sent?;
        let rtt = &path.rtt;
        Some(last + rtt.smoothed_or_initial() + (rtt.rttvar() * 4).max(self.loss.granularity) + self.max_ack_delay)
    }

    /// Fires the probe timeout. Returns the data of the oldest unacked packet
    /// on the path, which the caller should resend as a probe.
    pub fn on_pto(&mut self, path_id: PathId, now: Timestamp) -> Result<Option<u64>> {
        match self.pto_deadline(path_id) {
            Some(deadline) if deadline <= now => {}
            _ => return Err(Error::TimerNotExpired(path_id)),
        }
        self.stats.pto_count += 1;
        let path = &mut self.paths[path_id.index()];
        // re-arm from now even if the caller cannot send a probe
        path.last_ack_eliciting_sent = Some(now);
        let space = &self.spaces[self.mode.space_of(path_id).index()];
        Ok(path
            .unacked
            .values()
            .find_map(|pn| space.outstanding.get(&pn.value()).and_then(|r| r.data)))
    }

    pub fn pop_retransmission(&mut self) -> Option<u64> {
        self.retransmit.pop_front()
    }

    pub fn has_retransmission(&self) -> bool {
        !self.retransmit.is_empty()
    }

    /// Checks that each path's `bytes_in_flight` equals the sizes of its
    /// ack-eliciting packets that are neither acked nor lost.
    pub fn check_conservation(&self) -> bool {
        let mut sums = alloc::vec![0u64; self.paths.len()];
        for space in &self.spaces {
            for rec in space.outstanding.values().filter(|r| r.ack_eliciting) {
                sums[rec.path.index()] += rec.size;
            }
        }
        self.paths.iter().zip(sums).all(|(p, s)| p.bytes_in_flight == s)
    }

    /// Space a path's packets are numbered in.
    pub fn space_of(&self, path: PathId) -> SpaceId {
        self.mode.space_of(path)
    }
}

fn note_largest_acked(path: &mut PathSendState, rec: &SentPacketRecord) {
    if path.largest_acked_index.is_none_or(|i| rec.path_history_index > i) {
        path.largest_acked_index = Some(rec.path_history_index);
        path.largest_acked_on_path = Some(rec.pn);
    }
}
