use alloc::collections::BTreeMap;
use core::fmt;
use core::ops::Bound::{Included, Unbounded};

use crate::types::PacketNumber;

/// A contiguous run of packet numbers, `smallest..=largest`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AckRange {
    pub largest: PacketNumber,
    pub smallest: PacketNumber,
}

impl AckRange {
    /// Returns `None` when `smallest > largest`.
    pub fn new(largest: u64, smallest: u64) -> Option<Self> {
        (smallest <= largest).then_some(AckRange {
            largest: PacketNumber(largest),
            smallest: PacketNumber(smallest),
        })
    }

    pub fn single(pn: u64) -> Self {
        AckRange {
            largest: PacketNumber(pn),
            smallest: PacketNumber(pn),
        }
    }

    pub fn contains(&self, pn: u64) -> bool {
        self.smallest.0 <= pn && pn <= self.largest.0
    }

    /// `largest - smallest`, the value carried in an ACK Range Length field.
    pub fn length(&self) -> u64 {
        self.largest.0 - self.smallest.0
    }

    pub fn count(&self) -> u64 {
        self.length() + 1
    }
}

impl fmt::Display for AckRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.largest == self.smallest {
            write!(f, "({})", self.largest.0)
        } else {
            write!(f, "({},{})", self.largest.0, self.smallest.0)
        }
    }
}

/// Set of packet numbers stored as maximal disjoint ranges.
///
/// Adjacent ranges are always merged, so the number of stored ranges minus one
/// is the number of holes between the smallest and largest member.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RangeSet {
    // smallest -> largest, both inclusive
    map: BTreeMap<u64, u64>,
}

impl RangeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Number of maximal ranges.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn max(&self) -> Option<u64> {
        self.map.last_key_value().map(|(_, &hi)| hi)
    }

    pub fn min(&self) -> Option<u64> {
        self.map.first_key_value().map(|(&lo, _)| lo)
    }

    pub fn contains(&self, pn: u64) -> bool {
        self.range_containing(pn).is_some()
    }

    /// The maximal range that contains `pn`.
    pub fn range_containing(&self, pn: u64) -> Option<AckRange> {
        let (&lo, &hi) = self.map.range(..=pn).next_back()?;
        (hi >= pn).then_some(AckRange {
            largest: PacketNumber(hi),
            smallest: PacketNumber(lo),
        })
    }

    /// Inserts a single packet number. Returns `false` if it was present.
    pub fn insert(&mut self, pn: u64) -> bool {
        self.insert_range(pn, pn)
    }

    /// Inserts `smallest..=largest`. Returns `false` if nothing was added.
    pub fn insert_range(&mut self, mut largest: u64, mut smallest: u64) -> bool {
        debug_assert!(smallest <= largest);
        if let Some((&lo, &hi)) = self.map.range(..=smallest).next_back() {
            if hi >= largest {
                return false;
            }
            if hi.saturating_add(1) >= smallest {
                self.map.remove(&lo);
                smallest = lo;
            }
        }
        loop {
            let next = self
                .map
                .range((Included(smallest), Unbounded))
                .next()
                .map(|(&lo, &hi)| (lo, hi));
            match next {
                Some((lo, hi)) if lo <= largest.saturating_add(1) => {
                    self.map.remove(&lo);
                    largest = largest.max(hi);
                }
                _ => break,
            }
        }
        self.map.insert(smallest, largest);
        true
    }

    /// Holes between the smallest and largest member.
    pub fn holes(&self) -> usize {
        self.map.len().saturating_sub(1)
    }

    /// Holes between members that are `>= floor`. A range straddling
    /// `floor` counts as one range.
    pub fn holes_above(&self, floor: u64) -> usize {
        self.iter_desc()
            .take_while(|r| r.largest.0 >= floor)
            .count()
            .saturating_sub(1)
    }

    /// Ranges from the largest downwards.
    pub fn iter_desc(&self) -> impl Iterator<Item = AckRange> + '_ {
        self.map.iter().rev().map(|(&lo, &hi)| AckRange {
            largest: PacketNumber(hi),
            smallest: PacketNumber(lo),
        })
    }

    /// Ranges from the largest downwards, with everything above `anchor`
    /// removed.
    pub fn iter_desc_from(&self, anchor: u64) -> impl Iterator<Item = AckRange> + '_ {
        self.map.range(..=anchor).rev().map(move |(&lo, &hi)| AckRange {
            largest: PacketNumber(hi.min(anchor)),
            smallest: PacketNumber(lo),
        })
    }

    /// Number of packet numbers stored.
    pub fn count(&self) -> u64 {
        self.map.iter().map(|(&lo, &hi)| hi - lo + 1).sum()
    }

    /// Number of members in `smallest..=largest`.
    pub fn count_within(&self, smallest: u64, largest: u64) -> u64 {
        self.map
            .range(..=largest)
            .rev()
            .take_while(|(_, &hi)| hi >= smallest)
            .map(|(&lo, &hi)| hi.min(largest) - lo.max(smallest) + 1)
            .sum()
    }

    /// Whether every member of `other` is also a member of `self`.
    pub fn is_superset_of(&self, other: &RangeSet) -> bool {
        other
            .map
            .iter()
            .all(|(&lo, &hi)| self.range_containing(lo).is_some_and(|r| r.largest.0 >= hi))
    }
}

impl FromIterator<u64> for RangeSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut rs = RangeSet::new();
        for pn in iter {
            rs.insert(pn);
        }
        rs
    }
}
