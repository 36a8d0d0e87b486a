//! Path selection for data packets. ACKs never pass through here; they go
//! back on the path that triggered them.

use crate::sender::PathSendState;
use crate::types::PathId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SchedulerKind {
    #[default]
    MinRtt,
    RoundRobin,
}

/// Picks the path for the next data packet of `size` bytes, or `None` when
/// every path is congestion-window limited.
///
/// MinRtt prefers paths without an RTT sample, then the smallest smoothed
/// RTT, breaking ties by lower id. RoundRobin takes the first eligible path
/// after `cursor` and moves the cursor to it.
pub fn select_path(kind: SchedulerKind, paths: &[PathSendState], size: u64, cursor: &mut usize) -> Option<PathId> {
    match kind {
        SchedulerKind::MinRtt => paths
            .iter()
            .filter(|p| p.can_send(size))
            .min_by_key(|p| (p.rtt.smoothed(), p.path))
            .map(|p| p.path),
        SchedulerKind::RoundRobin => {
            let n = paths.len();
            (1..=n)
                .map(|i| (*cursor + i) % n)
                .find(|&i| paths[i].can_send(size))
                .map(|i| {
                    *cursor = i;
                    paths[i].path
                })
        }
    }
}
