//! Deterministic discrete-event simulation: an event queue ordered by
//! (time, insertion sequence) and link models for the paths.

mod link;

pub use link::{Direction, Link, LinkModel, LinkStats, Rate, TraceSchedule};

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::time::Timestamp;

struct Entry<E> {
    time: Timestamp,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

pub struct EventQueue<E> {
    heap: BinaryHeap<Entry<E>>,
    now: Timestamp,
    seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            now: Timestamp::ZERO,
            seq: 0,
        }
    }

    /// Time of the event most recently popped.
    pub fn now(&self) -> Timestamp {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn peek_time(&self) -> Option<Timestamp> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn schedule(&mut self, time: Timestamp, event: E) -> Result<()> {
        if time < self.now {
            return Err(Error::EventInPast);
        }
        self.heap.push(Entry {
            time,
            seq: self.seq,
            event,
        });
        self.seq += 1;
        Ok(())
    }

    pub fn pop(&mut self) -> Option<(Timestamp, E)> {
        let e = self.heap.pop()?;
        self.now = e.time;
        Some((e.time, e.event))
    }
}

pub trait EventHandler<E> {
    fn handle(&mut self, now: Timestamp, event: E, queue: &mut EventQueue<E>) -> Result<()>;

    /// Checked before each event; returning true ends the run.
    fn finished(&self) -> bool {
        false
    }
}

/// Processes events in order until the queue drains, the handler reports it
/// is finished, or the next event lies beyond `until`.
pub fn run<E, H: EventHandler<E>>(queue: &mut EventQueue<E>, handler: &mut H, until: Timestamp) -> Result<()> {
    while !handler.finished() {
        match queue.peek_time() {
            Some(t) if t <= until => {}
            _ => break,
        }
        let (now, event) = queue.pop().expect("peeked");
        handler.handle(now, event, queue)?;
    }
    Ok(())
}
