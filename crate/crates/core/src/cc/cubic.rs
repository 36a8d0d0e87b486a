use super::{CcConfig, CongestionController};
use crate::sender::rtt::RttEstimator;
use crate::time::Timestamp;

/// Cubic constant C, in segments per second cubed.
pub const CUBIC_C: f64 = 0.4;

/// Multiplicative decrease factor.
pub const CUBIC_BETA: f64 = 0.7;

/// Reno-friendly additive increase factor, 3 * (1 - beta) / (1 + beta).
const ALPHA: f64 = 3.0 * (1.0 - CUBIC_BETA) / (1.0 + CUBIC_BETA);

/// Cubic (RFC 9438), in bytes.
#[derive(Clone, Debug)]
pub struct Cubic {
    mss: u64,
    min_cwnd: u64,
    cwnd: u64,
    ssthresh: u64,
    /// Window before the last reduction, in segments.
    w_max: f64,
    /// Reno-friendly estimate, in segments.
    w_est: f64,
    k: f64,
    epoch_start: Option<Timestamp>,
    recovery_start: Option<Timestamp>,
}

impl Cubic {
    pub fn new(cfg: &CcConfig) -> Self {
        Cubic {
            mss: cfg.max_datagram_size,
            min_cwnd: cfg.min_cwnd(),
            cwnd: cfg.initial_cwnd(),
            ssthresh: u64::MAX,
            w_max: 0.0,
            w_est: 0.0,
            k: 0.0,
            epoch_start: None,
            recovery_start: None,
        }
    }

    /// Window before the last reduction, in bytes.
    pub fn w_max(&self) -> u64 {
        (self.w_max * self.mss as f64) as u64
    }

    /// Seconds after the epoch start at which the window returns to `w_max`.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn epoch_start(&self) -> Option<Timestamp> {
        self.epoch_start
    }

    /// W_cubic(t) in segments, `t` seconds after the epoch start.
    pub fn w_cubic(&self, t: f64) -> f64 {
        let d = t - self.k;
        CUBIC_C * d * d * d + self.w_max
    }

    fn in_recovery(&self, sent_time: Timestamp) -> bool {
        self.recovery_start.is_some_and(|r| sent_time <= r)
    }

    fn segments(&self, bytes: u64) -> f64 {
        bytes as f64 / self.mss as f64
    }

    fn start_epoch(&mut self, now: Timestamp) {
        let cwnd = self.segments(self.cwnd);
        self.epoch_start = Some(now);
        if cwnd < self.w_max {
            self.k = libm::cbrt((self.w_max - cwnd) / CUBIC_C);
        } else {
            self.k = 0.0;
            self.w_max = cwnd;
        }
        self.w_est = cwnd;
    }

    fn congestion_avoidance(&mut self, bytes: u64, now: Timestamp, rtt: &RttEstimator) {
        let Some(epoch) = self.epoch_start else {
            self.start_epoch(now);
            return self.congestion_avoidance(bytes, now, rtt);
        };
        let cwnd = self.segments(self.cwnd);
        let acked = self.segments(bytes);
        let t = (now - epoch).as_secs_f64();
        let srtt = rtt.smoothed_or_initial().as_secs_f64();

        let alpha = if self.w_est >= self.w_max { 1.0 } else { ALPHA };
        self.w_est += alpha * acked / cwnd;

        let target = self.w_cubic(t + srtt).clamp(cwnd, 1.5 * cwnd);
        let next = if self.w_cubic(t) < self.w_est {
            self.w_est.max(cwnd)
        } else {
            cwnd + (target - cwnd) / cwnd * acked
        };
        self.cwnd = ((next * self.mss as f64) as u64).max(self.min_cwnd);
    }
}

impl CongestionController for Cubic {
    fn cwnd(&self) -> u64 {
        self.cwnd
    }

    fn ssthresh(&self) -> u64 {
        self.ssthresh
    }

    fn on_ack(&mut self, bytes: u64, sent_time: Timestamp, now: Timestamp, rtt: &RttEstimator) {
        if self.in_recovery(sent_time) {
            return;
        }
        if self.cwnd < self.ssthresh {
            self.cwnd += bytes;
        } else {
            self.congestion_avoidance(bytes, now, rtt);
        }
    }

    fn on_congestion_event(&mut self, sent_time: Timestamp, now: Timestamp) {
        if self.in_recovery(sent_time) {
            return;
        }
        self.recovery_start = Some(now);
        let cwnd = self.segments(self.cwnd);
        // fast convergence
        self.w_max = if cwnd < self.w_max {
            cwnd * (1.0 + CUBIC_BETA) / 2.0
        } else {
            cwnd
        };
        let reduced = ((self.cwnd as f64 * CUBIC_BETA) as u64).max(self.min_cwnd);
        self.ssthresh = reduced;
        self.cwnd = reduced;
        self.epoch_start = None;
    }
}
