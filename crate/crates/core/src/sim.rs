//! Discrete-event engine: fixed-point virtual clock, a stable event queue and
//! named pseudo-random streams.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Simulated time in integer nanoseconds since the start of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    /// Rounds to the nearest nanosecond. Negative and NaN inputs clamp to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if !(secs > 0.0) {
            return SimTime::ZERO;
        }
        let ns = (secs * NANOS_PER_SEC as f64).round();
        if ns >= u64::MAX as f64 {
            SimTime::MAX
        } else {
            SimTime(ns as u64)
        }
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        let whole = self.0 / NANOS_PER_SEC;
        let frac = self.0 % NANOS_PER_SEC;
        whole as f64 + frac as f64 / NANOS_PER_SEC as f64
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(
            self.0
                .checked_sub(rhs.0)
                .expect("SimTime subtraction underflow"),
        )
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.as_secs_f64())
    }
}

/// Handle returned by [`Scheduler::schedule`]; used to cancel the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(u64);

struct Queued<E> {
    fire_at: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Queued<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.fire_at, self.seq) == (other.fire_at, other.seq)
    }
}

impl<E> Eq for Queued<E> {}

impl<E> PartialOrd for Queued<E> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Queued<E> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.fire_at, self.seq).cmp(&(other.fire_at, other.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub events_processed: u64,
    pub wall_time: Duration,
}

/// Event queue ordered by `(fire_at, insertion sequence)`.
///
/// The sequence number doubles as the event id, so ties at equal times are
/// delivered in the order they were scheduled.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Reverse<Queued<E>>>,
    pending: HashSet<u64>,
    processed: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            pending: HashSet::new(),
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn events_processed(&self) -> u64 {
        self.processed
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Queues `payload` to fire at `at`.
    ///
    /// Panics if `at` lies in the past: that is a bug in the caller, not a
    /// recoverable condition.
    pub fn schedule(&mut self, payload: E, at: SimTime) -> EventId {
        assert!(
            at >= self.now,
            "event scheduled in the past: at={} now={}",
            at,
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Queued {
            fire_at: at,
            seq,
            payload,
        }));
        self.pending.insert(seq);
        EventId(seq)
    }

    pub fn schedule_in(&mut self, payload: E, delay: SimTime) -> EventId {
        let at = self.now + delay;
        self.schedule(payload, at)
    }

    /// Returns true iff the event was still pending.
    pub fn cancel(&mut self, id: EventId) -> bool {
        self.pending.remove(&id.0)
    }

    /// Pops the next live event with `fire_at <= t_end` and advances the clock
    /// to its time.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, EventId, E)> {
        loop {
            let head = self.queue.peek()?;
            if head.0.fire_at > t_end {
                return None;
            }
            let Reverse(ev) = self.queue.pop().expect("peeked");
            if !self.pending.remove(&ev.seq) {
                continue;
            }
            self.now = ev.fire_at;
            self.processed += 1;
            return Some((ev.fire_at, EventId(ev.seq), ev.payload));
        }
    }

    /// Moves the clock forward to `t` without processing anything.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }

    /// Processes every event with `fire_at <= t_end` (closed interval) and
    /// leaves the clock at `t_end`.
    pub fn run_until<F, Err>(&mut self, t_end: SimTime, mut handler: F) -> Result<RunSummary, Err>
    where
        F: FnMut(&mut Self, SimTime, E) -> Result<(), Err>,
    {
        let started = Instant::now();
        let before = self.processed;
        while let Some((t, _, payload)) = self.pop_until(t_end) {
            handler(self, t, payload)?;
        }
        self.advance_to(t_end);
        Ok(RunSummary {
            events_processed: self.processed - before,
            wall_time: started.elapsed(),
        })
    }
}

/// Derives an independent, reproducible generator for one consumer of
/// randomness. Streams depend only on `(seed, stream_id)`, so adding a node
/// never perturbs another node's draws.
pub fn rng_stream(seed: u64, stream_id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(stream_id.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
