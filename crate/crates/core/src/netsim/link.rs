use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::time::Duration;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::time::Timestamp;

/// Delivery opportunities in Mahi-mahi trace format: millisecond timestamps,
/// one MTU-sized packet each, replayed with period equal to the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceSchedule {
    opportunities: Vec<u64>,
}

impl TraceSchedule {
    pub fn new(opportunities: Vec<u64>) -> Result<Self> {
        match opportunities.last() {
            None => return Err(Error::Trace("trace has no delivery opportunities")),
            Some(0) => return Err(Error::Trace("trace period must be positive")),
            _ => {}
        }
        if opportunities.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Trace("trace timestamps must be non-decreasing"));
        }
        Ok(TraceSchedule { opportunities })
    }

    /// Parses one decimal millisecond timestamp per line; blank lines are
    /// skipped. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> core::result::Result<Self, (usize, Error)> {
        let mut ops = Vec::new();
        let mut last_line = 0;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: u64 = line
                .parse()
                .map_err(|_| (line_no, Error::Trace("expected a non-negative integer")))?;
            if ops.last().is_some_and(|&p| v < p) {
                return Err((line_no, Error::Trace("trace timestamps must be non-decreasing")));
            }
            ops.push(v);
            last_line = line_no;
        }
        TraceSchedule::new(ops).map_err(|e| (last_line, e))
    }

    pub fn opportunities(&self) -> &[u64] {
        &self.opportunities
    }

    pub fn period_ms(&self) -> u64 {
        *self.opportunities.last().expect("non-empty")
    }

    /// Time of the k-th delivery opportunity.
    pub fn opportunity(&self, k: u64) -> Timestamp {
        let n = self.opportunities.len() as u64;
        let ms = self.opportunities[(k % n) as usize] + (k / n) * self.period_ms();
        Timestamp::from_millis(ms)
    }

    /// Index of the first opportunity at or after `t`.
    pub fn first_at_or_after(&self, t: Timestamp) -> u64 {
        let n = self.opportunities.len() as u64;
        let period_us = self.period_ms() * 1000;
        let wraps = t.as_micros() / period_us;
        let within = t.as_micros() - wraps * period_us;
        let idx = self.opportunities.partition_point(|&ms| ms * 1000 < within) as u64;
        wraps * n + idx
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Rate {
    Mbps(f64),
    Trace(TraceSchedule),
}

/// One path. Data flows down through a rate-limited droptail queue with
/// random loss; ACKs flow up with constant delay only.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinkModel {
    pub delay_down: Duration,
    pub delay_up: Duration,
    pub rate: Rate,
    pub loss_rate: f64,
    /// Packets that may wait for or occupy the transmitter.
    pub queue_capacity: usize,
    pub mtu: u64,
}

impl LinkModel {
    pub fn new(rate_mbps: f64, one_way_delay: Duration) -> Self {
        LinkModel {
            delay_down: one_way_delay,
            delay_up: one_way_delay,
            rate: Rate::Mbps(rate_mbps),
            loss_rate: 0.0,
            queue_capacity: 64,
            mtu: 1350,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.loss_rate) {
            return Err(Error::Config("loss_rate must be in [0, 1)"));
        }
        if self.queue_capacity == 0 {
            return Err(Error::Config("queue_capacity must be positive"));
        }
        if self.mtu == 0 {
            return Err(Error::Config("mtu must be positive"));
        }
        if let Rate::Mbps(r) = self.rate {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config("rate must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Data, sender to receiver.
    Down,
    /// ACKs, receiver to sender.
    Up,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinkStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped_queue: u64,
    pub dropped_loss: u64,
}

impl LinkStats {
    pub fn in_transit(&self) -> u64 {
        self.sent - self.delivered - self.dropped_queue - self.dropped_loss
    }
}

#[derive(Clone, Debug)]
pub struct Link {
    model: LinkModel,
    rng: ChaCha8Rng,
    /// Rate mode: when the transmitter frees up, in nanoseconds.
    busy_until_ns: u64,
    /// Trace mode: next unused opportunity.
    cursor: u64,
    /// Departure times of packets queued or in service.
    backlog: VecDeque<Timestamp>,
    down: LinkStats,
    up: LinkStats,
}

impl Link {
    /// `stream` selects an independent random stream for this link.
    pub fn new(model: LinkModel, seed: u64, stream: u64) -> Result<Self> {
        model.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Link {
            model,
            rng,
            busy_until_ns: 0,
            cursor: 0,
            backlog: VecDeque::new(),
            down: LinkStats::default(),
            up: LinkStats::default(),
        })
    }

    pub fn model(&self) -> &LinkModel {
        &self.model
    }

    pub fn stats(&self, dir: Direction) -> &LinkStats {
        match dir {
            Direction::Down => &self.down,
            Direction::Up => &self.up,
        }
    }

    /// Packets queued or in service at `now` in the down direction.
    pub fn backlog(&mut self, now: Timestamp) -> usize {
        while self.backlog.front().is_some_and(|&t| t <= now) {
            self.backlog.pop_front();
        }
        self.backlog.len()
    }

    /// Sends a packet and returns its arrival time, or `None` if dropped.
    pub fn transmit(&mut self, dir: Direction, size: u64, now: Timestamp) -> Option<Timestamp> {
        if dir == Direction::Up {
            self.up.sent += 1;
            return Some(now + self.model.delay_up);
        }
        self.down.sent += 1;
        // one draw per packet keeps the stream aligned across runs
        let draw = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        if draw < self.model.loss_rate {
            self.down.dropped_loss += 1;
            return None;
        }
        if self.backlog(now) >= self.model.queue_capacity {
            self.down.dropped_queue += 1;
            return None;
        }
        let departure = match &self.model.rate {
            Rate::Mbps(mbps) => {
                let start = self.busy_until_ns.max(now.as_micros() * 1000);
                let ser = libm::round(size as f64 * 8000.0 / mbps) as u64;
                self.busy_until_ns = start + ser;
                Timestamp::from_micros(self.busy_until_ns.div_ceil(1000))
            }
            Rate::Trace(trace) => {
                let k = trace.first_at_or_after(now).max(self.cursor);
                self.cursor = k + 1;
                trace.opportunity(k)
            }
        };
        self.backlog.push_back(departure);
        Some(departure + self.model.delay_down)
    }

    /// Marks a packet sent in `dir` as delivered.
    pub fn on_delivered(&mut self, dir: Direction) {
        match dir {
            Direction::Down => self.down.delivered += 1,
            Direction::Up => self.up.delivered += 1,
        }
    }
}
