//! Per-path congestion controllers. Every path runs its own instance; there
//! is no coupling between paths.

mod cubic;
mod new_reno;

pub use cubic::Cubic;
pub use new_reno::NewReno;

use crate::sender::rtt::RttEstimator;
use crate::time::Timestamp;

/// Default payload size of a data packet, in bytes.
pub const DEFAULT_MAX_DATAGRAM_SIZE: u64 = 1350;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CcAlgorithm {
    #[default]
    Cubic,
    NewReno,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CcConfig {
    pub algorithm: CcAlgorithm,
    pub max_datagram_size: u64,
    /// In packets.
    pub initial_window: u64,
    /// In packets; never below 2.
    pub minimum_window: u64,
}

impl Default for CcConfig {
    fn default() -> Self {
        CcConfig {
            algorithm: CcAlgorithm::Cubic,
            max_datagram_size: DEFAULT_MAX_DATAGRAM_SIZE,
            initial_window: 10,
            minimum_window: 2,
        }
    }
}

impl CcConfig {
    pub fn min_cwnd(&self) -> u64 {
        self.minimum_window.max(2) * self.max_datagram_size
    }

    pub fn initial_cwnd(&self) -> u64 {
        (self.initial_window * self.max_datagram_size).max(self.min_cwnd())
    }

    pub fn build(&self) -> Controller {
        match self.algorithm {
            CcAlgorithm::Cubic => Controller::Cubic(Cubic::new(self)),
            CcAlgorithm::NewReno => Controller::NewReno(NewReno::new(self)),
        }
    }
}

pub trait CongestionController {
    /// Congestion window in bytes.
    fn cwnd(&self) -> u64;

    fn ssthresh(&self) -> u64;

    fn in_slow_start(&self) -> bool {
        self.cwnd() < self.ssthresh()
    }

    fn on_packet_sent(&mut self, _bytes: u64, _now: Timestamp) {}

    /// `bytes` of a packet sent at `sent_time` were acknowledged.
    fn on_ack(&mut self, bytes: u64, sent_time: Timestamp, now: Timestamp, rtt: &RttEstimator);

    /// Packets were declared lost; the most recent of them was sent at
    /// `sent_time`. At most one reduction happens per round trip.
    fn on_congestion_event(&mut self, sent_time: Timestamp, now: Timestamp);
}

#[derive(Clone, Debug)]
pub enum Controller {
    Cubic(Cubic),
    NewReno(NewReno),
}

impl Controller {
    fn inner(&self) -> &dyn CongestionController {
        match self {
            Controller::Cubic(c) => c,
            Controller::NewReno(c) => c,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn CongestionController {
        match self {
            Controller::Cubic(c) => c,
            Controller::NewReno(c) => c,
        }
    }
}

impl CongestionController for Controller {
    fn cwnd(&self) -> u64 {
        self.inner().cwnd()
    }

    fn ssthresh(&self) -> u64 {
        self.inner().ssthresh()
    }

    fn on_packet_sent(&mut self, bytes: u64, now: Timestamp) {
        self.inner_mut().on_packet_sent(bytes, now)
    }

    fn on_ack(&mut self, bytes: u64, sent_time: Timestamp, now: Timestamp, rtt: &RttEstimator) {
        self.inner_mut().on_ack(bytes, sent_time, now, rtt)
    }

    fn on_congestion_event(&mut self, sent_time: Timestamp, now: Timestamp) {
        self.inner_mut().on_congestion_event(sent_time, now)
    }
}
