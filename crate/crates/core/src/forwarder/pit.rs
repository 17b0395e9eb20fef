//! Pending Interest Table.

use std::collections::{BTreeSet, HashMap};

use crate::name::ContentName;
use crate::sim::SimTime;

use super::FaceId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: ContentName,
    pub in_faces: BTreeSet<FaceId>,
    pub out_faces: BTreeSet<FaceId>,
    pub expiry_at: SimTime,
}

#[derive(Debug, Default, Clone)]
pub struct Pit {
    entries: HashMap<ContentName, PitEntry>,
}

impl Pit {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &ContentName) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub(super) fn get_mut(&mut self, name: &ContentName) -> Option<&mut PitEntry> {
        self.entries.get_mut(name)
    }

    pub(super) fn insert(&mut self, entry: PitEntry) {
        let prev = self.entries.insert(entry.name.clone(), entry);
        debug_assert!(prev.is_none(), "duplicate PIT entry");
    }

    pub(super) fn remove(&mut self, name: &ContentName) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    /// Removes entries with `expiry_at <= now` and returns how many went.
    pub(super) fn expire(&mut self, now: SimTime) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.expiry_at > now);
        before - self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }
}
