//! Forwarding Information Base with longest-prefix match.

use std::borrow::Borrow;
use std::collections::HashMap;

use crate::name::{ContentName, Prefix};

use super::FaceId;

impl Borrow<[Vec<u8>]> for Prefix {
    fn borrow(&self) -> &[Vec<u8>] {
        self.components()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Prefix,
    pub face: FaceId,
    pub metric: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct NextHop {
    face: FaceId,
    metric: u32,
}

#[derive(Debug, Default, Clone)]
pub struct Fib {
    routes: HashMap<Prefix, Vec<NextHop>>,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.routes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// Adds or updates the `(prefix, face)` entry.
    pub fn insert(&mut self, prefix: Prefix, face: FaceId, metric: u32) {
        let hops = self.routes.entry(prefix).or_default();
        match hops.iter_mut().find(|h| h.face == face) {
            Some(h) => h.metric = metric,
            None => hops.push(NextHop { face, metric }),
        }
    }

    /// Replaces every route for `prefix` with `(face, metric)` iff `metric` is
    /// strictly better than the best stored metric. Returns whether it did.
    pub fn install_if_better(&mut self, prefix: &Prefix, face: FaceId, metric: u32) -> bool {
        if let Some(best) = self.best_metric(prefix) {
            if metric >= best {
                return false;
            }
        }
        self.routes
            .insert(prefix.clone(), vec![NextHop { face, metric }]);
        true
    }

    pub fn best_metric(&self, prefix: &Prefix) -> Option<u32> {
        self.routes
            .get(prefix)
            .and_then(|hops| hops.iter().map(|h| h.metric).min())
    }

    pub fn remove(&mut self, prefix: &Prefix, face: FaceId) -> bool {
        let Some(hops) = self.routes.get_mut(prefix) else {
            return false;
        };
        let before = hops.len();
        hops.retain(|h| h.face != face);
        let removed = hops.len() != before;
        if hops.is_empty() {
            self.routes.remove(prefix);
        }
        removed
    }

    /// Longest matching prefix; ties on length go to the smallest metric, then
    /// the smallest face id.
    pub fn longest_prefix_match(&self, name: &ContentName) -> Option<FibEntry> {
        let comps = name.components();
        (0..=comps.len()).rev().find_map(|k| {
            let (key, hops) = self.routes.get_key_value(&comps[..k])?;
            let best = hops.iter().min_by_key(|h| (h.metric, h.face))?;
            Some(FibEntry {
                prefix: key.clone(),
                face: best.face,
                metric: best.metric,
            })
        })
    }

    /// All entries in a stable order.
    pub fn entries(&self) -> Vec<FibEntry> {
        let mut out: Vec<FibEntry> = self
            .routes
            .iter()
            .flat_map(|(prefix, hops)| {
                hops.iter().map(move |h| FibEntry {
                    prefix: prefix.clone(),
                    face: h.face,
                    metric: h.metric,
                })
            })
            .collect();
        out.sort_by(|a, b| (&a.prefix, a.face).cmp(&(&b.prefix, b.face)));
        out
    }
}
