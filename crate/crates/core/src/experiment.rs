//! Bulk-transfer scenarios over the simulated paths, and the metrics used to
//! compare SPNS and MPNS.
//!
//! The sender pushes `transfer_size` bytes as fixed-size chunks. The run ends
//! when the receiver holds every chunk and every pending ACK has been
//! delivered, or at the duration cap.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::ack::{ack_frame_wire_size, AckFrame};
use crate::cc::CcConfig;
use crate::error::{Error, Result};
use crate::netsim::{self, Direction, EventHandler, EventQueue, Link, LinkModel, LinkStats};
use crate::ranges::RangeSet;
use crate::receiver::{Action, ReceiverState, RecvConfig};
use crate::scheduler::{select_path, SchedulerKind};
use crate::sender::{LossConfig, Sender};
use crate::time::Timestamp;
use crate::types::{PacketNumber, PathId, SpaceId, SpaceMode};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioConfig {
    pub mode: SpaceMode,
    pub scheduler: SchedulerKind,
    pub cc: CcConfig,
    /// Bytes of application data.
    pub transfer_size: u64,
    pub paths: Vec<LinkModel>,
    pub recv: RecvConfig,
    pub loss: LossConfig,
    pub seed: u64,
    pub duration_cap: Duration,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mode: SpaceMode::Spns,
            scheduler: SchedulerKind::MinRtt,
            cc: CcConfig::default(),
            transfer_size: 20_000_000,
            paths: vec![
                LinkModel::new(40.0, Duration::from_millis(15)),
                LinkModel::new(15.0, Duration::from_millis(60)),
            ],
            recv: RecvConfig::default(),
            loss: LossConfig::default(),
            seed: 1,
            duration_cap: Duration::from_secs(120),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.transfer_size == 0 {
            return Err(Error::Config("transfer_size must be positive"));
        }
        if self.paths.is_empty() {
            return Err(Error::Config("at least one path is required"));
        }
        if self.cc.max_datagram_size == 0 {
            return Err(Error::Config("max_datagram_size must be positive"));
        }
        for p in &self.paths {
            p.validate()?;
            if self.cc.max_datagram_size > p.mtu {
                return Err(Error::Config("max_datagram_size exceeds a path mtu"));
            }
        }
        self.recv.validate()?;
        self.loss.validate()
    }
}

/// (time in ms, value) pairs.
pub type Series = Vec<(f64, f64)>;

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub mode: SpaceMode,
    /// Seconds until the receiver held all data, or the cap if incomplete.
    pub completion_time: f64,
    /// kB/s.
    pub goodput: f64,
    pub incomplete: bool,
    pub ack_frames: u64,
    /// Bytes.
    pub avg_ack_frame_size: f64,
    /// Frames by range count; index 0 is unused.
    pub ack_range_count_histogram: Vec<u64>,
    pub max_ranges_per_frame: usize,
    pub srtt_timeseries: Vec<Series>,
    /// Every RTT sample attributed to a path, in ms.
    pub rtt_samples: Vec<Series>,
    /// Samples whose largest acknowledged packet went out on another path.
    pub mixed_rtt_samples: Series,
    /// All samples, attributed or mixed, by the path their largest
    /// acknowledged packet was sent on.
    pub samples_by_largest_path: Vec<u64>,
    pub received_pn_timeline: Vec<Series>,
    /// Holes that reordering across paths can still fill, summed over
    /// spaces; recorded whenever it changes.
    pub hole_count_timeline: Series,
    pub max_hole_count: u64,
    /// Largest number of gaps ever present in a received set, including
    /// gaps left by lost packets.
    pub max_raw_holes: u64,
    pub packet_threshold_losses: u64,
    pub time_threshold_losses: u64,
    pub spurious_retx: u64,
    pub pto_count: u64,
    pub data_packets_per_path: Vec<u64>,
    pub retransmissions: u64,
    pub packets_received: u64,
    /// Received packets that no emitted ACK frame ever covered.
    pub never_acknowledged: u64,
    pub link_stats: Vec<LinkStats>,
}

enum Event {
    Data { path: PathId, pn: PacketNumber, chunk: u64 },
    Ack { path: PathId, frame: AckFrame },
    AckTimer { path: PathId, deadline: Timestamp },
    SenderTimer { path: PathId, generation: u64 },
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    chunk_size: u64,
    chunks: u64,
    sender: Sender,
    receiver: ReceiverState,
    links: Vec<Link>,
    rr_cursor: usize,
    next_chunk: u64,
    retx: VecDeque<u64>,
    chunk_acked: Vec<bool>,
    chunk_received: Vec<bool>,
    chunks_received: u64,
    completed_at: Option<Timestamp>,
    timer_generation: Vec<u64>,
    timer_armed: Vec<Option<Timestamp>>,
    emitted: Vec<RangeSet>,
    ack_size_sum: u64,
    holes_now: u64,
    m: MetricsReport,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.paths.len();
        let chunk_size = cfg.cc.max_datagram_size;
        let chunks = cfg.transfer_size.div_ceil(chunk_size);
        let links = cfg
            .paths
            .iter()
            .enumerate()
            .map(|(i, m)| Link::new(m.clone(), cfg.seed, i as u64))
            .collect::<Result<Vec<_>>>()?;
        let spaces = cfg.mode.space_count(n);
        Ok(Sim {
            cfg,
            chunk_size,
            chunks,
            sender: Sender::new(cfg.mode, n, &cfg.cc, cfg.loss.clone(), cfg.recv.max_ack_delay)?,
            receiver: ReceiverState::new(cfg.mode, n, cfg.recv.clone())?,
            links,
            rr_cursor: n - 1,
            next_chunk: 0,
            retx: VecDeque::new(),
            chunk_acked: vec![false; chunks as usize],
            chunk_received: vec![false; chunks as usize],
            chunks_received: 0,
            completed_at: None,
            timer_generation: vec![0; n],
            timer_armed: vec![None; n],
            emitted: vec![RangeSet::new(); spaces],
            ack_size_sum: 0,
            holes_now: 0,
            m: MetricsReport {
                mode: cfg.mode,
                srtt_timeseries: vec![Vec::new(); n],
                rtt_samples: vec![Vec::new(); n],
                received_pn_timeline: vec![Vec::new(); n],
                data_packets_per_path: vec![0; n],
                samples_by_largest_path: vec![0; n],
                ack_range_count_histogram: vec![0],
                hole_count_timeline: vec![(0.0, 0.0)],
                ..MetricsReport::default()
            },
        })
    }

    fn next_payload(&mut self) -> Option<(u64, bool)> {
        while let Some(c) = self.sender.pop_retransmission() {
            self.retx.push_back(c);
        }
        while let Some(&c) = self.retx.front() {
            if !self.chunk_acked[c as usize] {
                return Some((c, true));
            }
            self.retx.pop_front();
        }
        (self.next_chunk < self.chunks).then_some((self.next_chunk, false))
    }

    fn transmit(&mut self, queue: &mut EventQueue<Event>, path: PathId, chunk: u64, now: Timestamp) -> Result<()> {
        let pn = self.sender.send(path, now, self.chunk_size, Some(chunk))?;
        self.m.data_packets_per_path[path.index()] += 1;
        if let Some(at) = self.links[path.index()].transmit(Direction::Down, self.chunk_size, now) {
            queue.schedule(at, Event::Data { path, pn, chunk })?;
        }
        Ok(())
    }

    fn try_send(&mut self, queue: &mut EventQueue<Event>, now: Timestamp) -> Result<()> {
        if self.completed_at.is_some() {
            return Ok(());
        }
        while let Some((chunk, is_retx)) = self.next_payload() {
            let Some(path) = select_path(
                self.cfg.scheduler,
                self.sender.paths(),
                self.chunk_size,
                &mut self.rr_cursor,
            ) else {
                break;
            };
            if is_retx {
                self.retx.pop_front();
                self.m.retransmissions += 1;
            } else {
                self.next_chunk += 1;
            }
            self.transmit(queue, path, chunk, now)?;
        }
        self.rearm_sender_timers(queue)
    }

    fn rearm_sender_timers(&mut self, queue: &mut EventQueue<Event>) -> Result<()> {
        if self.completed_at.is_some() {
            return Ok(());
        }
        for i in 0..self.links.len() {
            let path = PathId(i as u32);
            let deadline = match (self.sender.loss_time(path), self.sender.pto_deadline(path)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            if deadline != self.timer_armed[i] {
                self.timer_armed[i] = deadline;
                self.timer_generation[i] += 1;
                if let Some(t) = deadline {
                    let t = t.max(queue.now());
                    let generation = self.timer_generation[i];
                    queue.schedule(t, Event::SenderTimer { path, generation })?;
                }
            }
        }
        Ok(())
    }

    fn emit_ack(&mut self, queue: &mut EventQueue<Event>, frame: AckFrame, path: PathId, now: Timestamp) -> Result<()> {
        let size = ack_frame_wire_size(&frame, self.cfg.mode)?;
        let ranges = frame.ranges.len();
        self.m.ack_frames += 1;
        self.ack_size_sum += size as u64;
        if self.m.ack_range_count_histogram.len() <= ranges {
            self.m.ack_range_count_histogram.resize(ranges + 1, 0);
        }
        self.m.ack_range_count_histogram[ranges] += 1;
        self.m.max_ranges_per_frame = self.m.max_ranges_per_frame.max(ranges);
        let emitted = &mut self.emitted[frame.space.index()];
        for r in &frame.ranges {
            emitted.insert_range(r.largest.value(), r.smallest.value());
        }
        if let Some(at) = self.links[path.index()].transmit(Direction::Up, size as u64, now) {
            queue.schedule(at, Event::Ack { path, frame })?;
        }
        Ok(())
    }

    fn on_action(&mut self, queue: &mut EventQueue<Event>, action: Option<Action>, now: Timestamp) -> Result<()> {
        match action {
            Some(Action::EmitAckOnPath(p)) => {
                let frame = self.receiver.build_ack_frame(p, now)?;
                self.emit_ack(queue, frame, p, now)
            }
            Some(Action::ArmTimer(path, deadline)) => queue.schedule(deadline, Event::AckTimer { path, deadline }),
            None => Ok(()),
        }
    }

    fn on_data(
        &mut self,
        queue: &mut EventQueue<Event>,
        path: PathId,
        pn: PacketNumber,
        chunk: u64,
        now: Timestamp,
    ) -> Result<()> {
        self.links[path.index()].on_delivered(Direction::Down);
        self.m.packets_received += 1;
        let ms = now.as_millis_f64();
        self.m.received_pn_timeline[path.index()].push((ms, pn.value() as f64));
        let action = self.receiver.on_packet_received(path, pn, now, true)?;

        let spaces = self.cfg.mode.space_count(self.links.len());
        let mut holes = 0;
        for s in 0..spaces {
            let space = SpaceId(s as u32);
            holes += self.receiver.reorder_holes(space) as u64;
            let raw = self.receiver.received(space).map_or(0, |r| r.holes()) as u64;
            self.m.max_raw_holes = self.m.max_raw_holes.max(raw);
        }
        if holes != self.holes_now {
            self.holes_now = holes;
            self.m.hole_count_timeline.push((ms, holes as f64));
            self.m.max_hole_count = self.m.max_hole_count.max(holes);
        }

        if !self.chunk_received[chunk as usize] {
            self.chunk_received[chunk as usize] = true;
            self.chunks_received += 1;
            if self.chunks_received == self.chunks {
                self.completed_at = Some(now);
            }
        }
        self.on_action(queue, action, now)
    }

    fn on_ack(&mut self, queue: &mut EventQueue<Event>, path: PathId, frame: AckFrame, now: Timestamp) -> Result<()> {
        self.links[path.index()].on_delivered(Direction::Up);
        let result = self.sender.on_ack_received(path, &frame, now)?;
        for rec in &result.newly_acked {
            if let Some(c) = rec.data {
                self.chunk_acked[c as usize] = true;
            }
        }
        let ms = now.as_millis_f64();
        if let Some(sample) = result.rtt_sample {
            let latest = sample.latest.as_secs_f64() * 1e3;
            self.m.samples_by_largest_path[sample.largest_sent_on.index()] += 1;
            match sample.path {
                Some(p) => {
                    self.m.rtt_samples[p.index()].push((ms, latest));
                    let srtt = self.sender.paths()[p.index()].rtt.smoothed_or_initial();
                    self.m.srtt_timeseries[p.index()].push((ms, srtt.as_secs_f64() * 1e3));
                }
                None => self.m.mixed_rtt_samples.push((ms, latest)),
            }
        }
        self.try_send(queue, now)
    }

    fn on_sender_timer(
        &mut self,
        queue: &mut EventQueue<Event>,
        path: PathId,
        generation: u64,
        now: Timestamp,
    ) -> Result<()> {
        if self.completed_at.is_some() || generation != self.timer_generation[path.index()] {
            return Ok(());
        }
        self.timer_armed[path.index()] = None;
        if self.sender.loss_time(path).is_some_and(|t| t <= now) {
            self.sender.detect_losses(path, now)?;
        } else if self.sender.pto_deadline(path).is_some_and(|t| t <= now) {
            if let Some(chunk) = self.sender.on_pto(path, now)? {
                if !self.chunk_acked[chunk as usize] {
                    // probes ignore the congestion window
                    self.m.retransmissions += 1;
                    self.transmit(queue, path, chunk, now)?;
                }
            }
        }
        self.try_send(queue, now)
    }

    fn finish(mut self, end: Timestamp) -> MetricsReport {
        let s = self.sender.stats();
        self.m.packet_threshold_losses = s.packet_threshold_losses;
        self.m.time_threshold_losses = s.time_threshold_losses;
        self.m.spurious_retx = s.spurious_losses;
        self.m.pto_count = s.pto_count;
        if self.m.ack_frames > 0 {
            self.m.avg_ack_frame_size = self.ack_size_sum as f64 / self.m.ack_frames as f64;
        }
        self.m.never_acknowledged = (0..self.emitted.len())
            .map(|s| {
                let received = self.receiver.received(SpaceId(s as u32)).map_or(0, |r| r.count());
                received - self.emitted[s].count()
            })
            .sum();
        self.m.link_stats = self.links.iter().map(|l| *l.stats(Direction::Down)).collect();
        let (secs, bytes) = match self.completed_at {
            Some(t) => (t.as_millis_f64() / 1e3, self.cfg.transfer_size),
            None => {
                self.m.incomplete = true;
                let got = (self.chunks_received * self.chunk_size).min(self.cfg.transfer_size);
                (end.as_millis_f64() / 1e3, got)
            }
        };
        self.m.completion_time = secs;
        self.m.goodput = if secs > 0.0 { bytes as f64 / 1e3 / secs } else { 0.0 };
        self.m
    }
}

impl EventHandler<Event> for Sim<'_> {
    fn handle(&mut self, now: Timestamp, event: Event, queue: &mut EventQueue<Event>) -> Result<()> {
        match event {
            Event::Data { path, pn, chunk } => self.on_data(queue, path, pn, chunk, now),
            Event::Ack { path, frame } => self.on_ack(queue, path, frame, now),
            Event::AckTimer { path, deadline } => {
                if self.receiver.path(path)?.ack_timer_deadline != Some(deadline) {
                    return Ok(());
                }
                let frame = self.receiver.on_ack_timer(path, now)?;
                self.emit_ack(queue, frame, path, now)
            }
            Event::SenderTimer { path, generation } => self.on_sender_timer(queue, path, generation, now),
        }
    }
}

/// Runs one transfer and collects its metrics. Deterministic in the config.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    let mut sim = Sim::new(cfg)?;
    let mut queue = EventQueue::new();
    sim.try_send(&mut queue, Timestamp::ZERO)?;
    let cap = Timestamp::ZERO + cfg.duration_cap;
    netsim::run(&mut queue, &mut sim, cap)?;
    let end = if sim.completed_at.is_some() { queue.now() } else { cap };
    Ok(sim.finish(end))
}

/// Signed percentage change of `spns` relative to `mpns`.
pub fn percent_delta(spns: f64, mpns: f64) -> f64 {
    if mpns == 0.0 {
        return 0.0;
    }
    (spns - mpns) / mpns * 100.0
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonReport {
    pub spns: MetricsReport,
    pub mpns: MetricsReport,
    /// Goodput change of SPNS over MPNS, in percent.
    pub speed_delta: f64,
    /// ACK frame size change of SPNS over MPNS, in percent.
    pub ack_size_delta: f64,
}

impl ComparisonReport {
    /// Rows of (metric, MPNS, SPNS, rate).
    pub fn rows(&self) -> [(&'static str, f64, f64, f64); 2] {
        [
            ("Speed (kB/s)", self.mpns.goodput, self.spns.goodput, self.speed_delta),
            (
                "ACK frame size (Byte)",
                self.mpns.avg_ack_frame_size,
                self.spns.avg_ack_frame_size,
                self.ack_size_delta,
            ),
        ]
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<24}{:>12}{:>12}{:>10}\n", "", "MPNS", "SPNS", "Rate");
        for (name, mpns, spns, rate) in self.rows() {
            out += &format!("{name:<24}{mpns:>12.2}{spns:>12.2}{rate:>+9.2}%\n");
        }
        out
    }
}

/// Runs `base` under both numbering modes with the same seed.
pub fn compare_modes(base: &ScenarioConfig) -> Result<ComparisonReport> {
    let spns = run_scenario(&ScenarioConfig {
        mode: SpaceMode::Spns,
        ..base.clone()
    })?;
    let mpns = run_scenario(&ScenarioConfig {
        mode: SpaceMode::Mpns,
        ..base.clone()
    })?;
    Ok(ComparisonReport {
        speed_delta: percent_delta(spns.goodput, mpns.goodput),
        ack_size_delta: percent_delta(spns.avg_ack_frame_size, mpns.avg_ack_frame_size),
        spns,
        mpns,
    })
}

/// `base` with suppression at `default_limit`, or without suppression for
/// `None`.
pub fn with_default_limit(base: &ScenarioConfig, default_limit: Option<usize>) -> ScenarioConfig {
    let mut cfg = base.clone();
    match default_limit {
        Some(limit) => {
            cfg.recv.suppression_enabled = true;
            cfg.recv.default_limit = limit;
            cfg.recv.maximum_limit = cfg.recv.maximum_limit.max(limit);
        }
        None => cfg.recv.suppression_enabled = false,
    }
    cfg
}

/// Runs `base` once per default limit.
pub fn sweep_default_limit(
    base: &ScenarioConfig,
    limits: &[Option<usize>],
) -> Result<Vec<(Option<usize>, MetricsReport)>> {
    limits
        .iter()
        .map(|&l| run_scenario(&with_default_limit(base, l)).map(|m| (l, m)))
        .collect()
}

/// Cumulative distribution of frames over range counts: (range count,
/// fraction of frames with at most that many ranges).
pub fn range_count_cdf(histogram: &[u64]) -> Vec<(usize, f64)> {
    let total: u64 = histogram.iter().sum();
    let mut acc = 0;
    histogram
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| {
            acc += c;
            (n, if total == 0 { 0.0 } else { acc as f64 / total as f64 })
        })
        .collect()
}
