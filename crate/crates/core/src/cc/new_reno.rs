use super::{CcConfig, CongestionController};
use crate::sender::rtt::RttEstimator;
use crate::time::Timestamp;

/// NewReno as in RFC 9002, appendix B.
#[derive(Clone, Debug)]
pub struct NewReno {
    mss: u64,
    min_cwnd: u64,
    cwnd: u64,
    ssthresh: u64,
    bytes_acked: u64,
    recovery_start: Option<Timestamp>,
}

impl NewReno {
    pub fn new(cfg: &CcConfig) -> Self {
        NewReno {
            mss: cfg.max_datagram_size,
            min_cwnd: cfg.min_cwnd(),
            cwnd: cfg.initial_cwnd(),
            ssthresh: u64::MAX,
            bytes_acked: 0,
            recovery_start: None,
        }
    }
}

impl CongestionController for NewReno {
    fn cwnd(&self) -> u64 {
        self.cwnd
    }

    fn ssthresh(&self) -> u64 {
        self.ssthresh
    }

    fn on_ack(&mut self, bytes: u64, sent_time: Timestamp, _now: Timestamp, _rtt: &RttEstimator) {
        if self.recovery_start.is_some_and(|r| sent_time <= r) {
            return;
        }
        if self.cwnd < self.ssthresh {
            self.cwnd += bytes;
            return;
        }
        self.bytes_acked += bytes;
        if self.bytes_acked >= self.cwnd {
            self.bytes_acked -= self.cwnd;
            self.cwnd += self.mss;
        }
    }

    fn on_congestion_event(&mut self, sent_time: Timestamp, now: Timestamp) {
        if self.recovery_start.is_some_and(|r| sent_time <= r) {
            return;
        }
        self.recovery_start = Some(now);
        self.ssthresh = (self.cwnd / 2).max(self.min_cwnd);
        self.cwnd = self.ssthresh;
        self.bytes_acked = 0;
    }
}
