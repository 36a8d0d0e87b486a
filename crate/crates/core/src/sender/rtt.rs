use core::time::Duration;

use crate::error::{Error, Result};

/// RTT assumed before the first sample (RFC 9002, section 6.2.2).
pub const INITIAL_RTT: Duration = Duration::from_millis(333);

/// Per-path RTT state: latest sample, smoothed RTT, mean deviation and
/// minimum, maintained as in RFC 9002 section 5.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RttEstimator {
    latest: Duration,
    smoothed: Option<Duration>,
    rttvar: Duration,
    min: Option<Duration>,
    samples: u64,
}

impl RttEstimator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds one RTT sample together with the peer-reported ACK delay.
    pub fn update(&mut self, sample: Duration, ack_delay: Duration) -> Result<()> {
        if sample.is_zero() {
            return Err(Error::NonPositiveRtt);
        }
        self.latest = sample;
        self.samples += 1;
        let min = self.min.map_or(sample, |m| m.min(sample));
        self.min = Some(min);

        let Some(smoothed) = self.smoothed else {
            self.smoothed = Some(sample);
            self.rttvar = sample / 2;
            return Ok(());
        };
        let adjusted = if sample >= min + ack_delay {
            sample - ack_delay
        } else {
            sample
        };
        let diff = smoothed.abs_diff(adjusted);
        self.rttvar = (self.rttvar * 3 + diff) / 4;
        self.smoothed = Some((smoothed * 7 + adjusted) / 8);
        Ok(())
    }

    pub fn has_sample(&self) -> bool {
        self.smoothed.is_some()
    }

    pub fn latest(&self) -> Duration {
        self.latest
    }

    /// Smoothed RTT, if any sample has been taken.
    pub fn smoothed(&self) -> Option<Duration> {
        self.smoothed
    }

    /// Smoothed RTT, or [`INITIAL_RTT`] before the first sample.
    pub fn smoothed_or_initial(&self) -> Duration {
        self.smoothed.unwrap_or(INITIAL_RTT)
    }

    pub fn rttvar(&self) -> Duration {
        if self.smoothed.is_some() {
            self.rttvar
        } else {
            INITIAL_RTT / 2
        }
    }

    pub fn min(&self) -> Option<Duration> {
        self.min
    }

    pub fn sample_count(&self) -> u64 {
        self.samples
    }
}
