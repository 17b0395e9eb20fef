//! Content Store with FIFO replacement.

use std::collections::{HashMap, VecDeque};

use crate::message::ContentObject;
use crate::name::ContentName;
use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsEntry {
    pub object: ContentObject,
    pub inserted_at: SimTime,
    pub fifo_seq: u64,
}

/// Exact-match cache keyed by `(name, segment)`. Re-inserting a cached object
/// refreshes it in place and keeps its position in the eviction order.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    entries: HashMap<ContentName, CsEntry>,
    order: VecDeque<ContentName>,
    next_seq: u64,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        ContentStore {
            capacity,
            entries: HashMap::new(),
            order: VecDeque::new(),
            next_seq: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &ContentName) -> Option<&ContentObject> {
        self.entries.get(name).map(|e| &e.object)
    }

    pub fn contains(&self, name: &ContentName) -> bool {
        self.entries.contains_key(name)
    }

    /// Inserts `obj`, evicting the oldest entry when full. Capacity 0 disables
    /// caching.
    pub fn insert(&mut self, obj: ContentObject, now: SimTime) -> Option<CsEntry> {
        if self.capacity == 0 {
            return None;
        }
        if let Some(existing) = self.entries.get_mut(&obj.name) {
            existing.object = obj;
            return None;
        }
        let evicted = if self.entries.len() >= self.capacity {
            let victim = self.order.pop_front().expect("order tracks entries");
            self.entries.remove(&victim)
        } else {
            None
        };
        let fifo_seq = self.next_seq;
        self.next_seq += 1;
        self.order.push_back(obj.name.clone());
        self.entries.insert(
            obj.name.clone(),
            CsEntry {
                object: obj,
                inserted_at: now,
                fifo_seq,
            },
        );
        evicted
    }

    /// Names in eviction order (oldest first).
    pub fn fifo_order(&self) -> impl Iterator<Item = &ContentName> {
        self.order.iter()
    }
}
