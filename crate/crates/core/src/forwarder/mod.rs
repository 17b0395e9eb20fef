//! Per-node CCN message processing over PIT, FIB and CS.
//!
//! The forwarder is a pure state machine: each handler mutates the tables and
//! returns the effects for the node shell to carry out, in order. Cache
//! placement is leave-copy-everywhere and replacement is FIFO.

mod cs;
mod fib;
mod pit;

use std::fmt;

pub use cs::{ContentStore, CsEntry};
pub use fib::{Fib, FibEntry};
pub use pit::{Pit, PitEntry};

use crate::message::{ContentObject, Interest, InterestReturn, Message, ReturnCode};
use crate::name::ContentName;
use crate::sim::SimTime;

/// Face identifier, unique within a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId(pub u16);

/// The face every node's applications sit behind.
pub const LOCAL_FACE: FaceId = FaceId(0);

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "face{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// Content Object with no matching PIT entry.
    Unsolicited,
    /// Interest Return with no matching PIT entry.
    NoPitEntry,
    /// Interest came back on a face it was already forwarded on.
    Loop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Send(FaceId, Message),
    DeliverLocal(Message),
    /// The object was placed in the CS; `evicted` is the entry that made room.
    CacheInsert {
        object: ContentObject,
        evicted: Option<CsEntry>,
    },
    RecordHit,
    RecordMiss,
    /// A PIT entry was created; the shell arms an expiry timer for it.
    PitCreated { expiry_at: SimTime },
    Drop(DropReason),
}

pub type ForwarderActions = Vec<Action>;

fn emit(actions: &mut ForwarderActions, face: FaceId, msg: Message) {
    if face == LOCAL_FACE {
        actions.push(Action::DeliverLocal(msg));
    } else {
        actions.push(Action::Send(face, msg));
    }
}

#[derive(Debug, Clone)]
pub struct Forwarder {
    pub pit: Pit,
    pub fib: Fib,
    pub cs: ContentStore,
    cs_lookups: u64,
}

impl Forwarder {
    pub fn new(cs_capacity: usize) -> Self {
        Forwarder {
            pit: Pit::default(),
            fib: Fib::new(),
            cs: ContentStore::new(cs_capacity),
            cs_lookups: 0,
        }
    }

    /// Number of CS lookups performed so far.
    pub fn cs_lookups(&self) -> u64 {
        self.cs_lookups
    }

    pub fn on_interest(&mut self, face: FaceId, interest: Interest, now: SimTime) -> ForwarderActions {
        let mut actions = Vec::new();
        let mut fwd = interest.clone();
        fwd.hop_limit = fwd.hop_limit.saturating_sub(1);

        self.cs_lookups += 1;
        if let Some(obj) = self.cs.get(&interest.name) {
            actions.push(Action::RecordHit);
            emit(&mut actions, face, Message::ContentObject(obj.clone()));
            return actions;
        }
        actions.push(Action::RecordMiss);

        if let Some(entry) = self.pit.get_mut(&interest.name) {
            if entry.out_faces.contains(&face) {
                actions.push(Action::Drop(DropReason::Loop));
            } else {
                entry.in_faces.insert(face);
            }
            return actions;
        }

        let route = self
            .fib
            .longest_prefix_match(&interest.name)
            .filter(|r| r.face != face);
        let Some(route) = route else {
            emit(&mut actions, face, interest_return(interest, ReturnCode::NoRoute));
            return actions;
        };
        if fwd.hop_limit == 0 && route.face != LOCAL_FACE {
            emit(
                &mut actions,
                face,
                interest_return(interest, ReturnCode::HopLimitExceeded),
            );
            return actions;
        }

        let expiry_at = now + fwd.lifetime();
        self.pit.insert(PitEntry {
            name: fwd.name.clone(),
            in_faces: [face].into(),
            out_faces: [route.face].into(),
            expiry_at,
        });
        actions.push(Action::PitCreated { expiry_at });
        emit(&mut actions, route.face, Message::Interest(fwd));
        actions
    }

    pub fn on_content_object(&mut self, face: FaceId, obj: ContentObject, now: SimTime) -> ForwarderActions {
        let Some(entry) = self.pit.remove(&obj.name) else {
            return vec![Action::Drop(DropReason::Unsolicited)];
        };
        let mut actions = Vec::with_capacity(entry.in_faces.len() + 1);
        let evicted = self.cs.insert(obj.clone(), now);
        actions.push(Action::CacheInsert {
            object: obj.clone(),
            evicted,
        });
        for in_face in entry.in_faces.iter().copied().filter(|f| *f != face) {
            emit(&mut actions, in_face, Message::ContentObject(obj.clone()));
        }
        actions
    }

    pub fn on_interest_return(&mut self, face: FaceId, ret: InterestReturn, _now: SimTime) -> ForwarderActions {
        let Some(entry) = self.pit.remove(&ret.original.name) else {
            return vec![Action::Drop(DropReason::NoPitEntry)];
        };
        let mut actions = Vec::with_capacity(entry.in_faces.len());
        for in_face in entry.in_faces.iter().copied().filter(|f| *f != face) {
            emit(&mut actions, in_face, Message::InterestReturn(ret.clone()));
        }
        actions
    }

    pub fn on_message(&mut self, face: FaceId, msg: Message, now: SimTime) -> ForwarderActions {
        match msg {
            Message::Interest(i) => self.on_interest(face, i, now),
            Message::ContentObject(o) => self.on_content_object(face, o, now),
            Message::InterestReturn(r) => self.on_interest_return(face, r, now),
        }
    }

    pub fn fib_longest_prefix_match(&self, name: &ContentName) -> Option<FibEntry> {
        self.fib.longest_prefix_match(name)
    }

    pub fn cs_insert(&mut self, obj: ContentObject, now: SimTime) -> Option<CsEntry> {
        self.cs.insert(obj, now)
    }

    /// Silently drops expired PIT entries; returns how many were removed.
    pub fn pit_expire(&mut self, now: SimTime) -> usize {
        self.pit.expire(now)
    }
}

fn interest_return(original: Interest, return_code: ReturnCode) -> Message {
    Message::InterestReturn(InterestReturn {
        original,
        return_code,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::Prefix;

    const F1: FaceId = FaceId(1);
    const F2: FaceId = FaceId(2);
    const F3: FaceId = FaceId(3);

    fn name() -> ContentName {
        ContentName::parse("ccnx:/site/content0").unwrap().with_segment(0)
    }

    fn interest() -> Interest {
        Interest::new(name())
    }

    fn object() -> ContentObject {
        ContentObject {
            name: name(),
            payload_size: 1000,
            expiry_ms: 0,
            total_segments: 1,
        }
    }

    fn routed() -> Forwarder {
        let mut f = Forwarder::new(10);
        f.fib.insert(Prefix::parse("ccnx:/site").unwrap(), F3, 1);
        f
    }

    #[test]
    fn cs_hit_answers_directly() {
        let mut f = routed();
        f.cs_insert(object(), SimTime::ZERO);
        let actions = f.on_interest(F1, interest(), SimTime::ZERO);
        assert_eq!(
            actions,
            vec![Action::RecordHit, Action::Send(F1, Message::ContentObject(object()))]
        );
        assert!(f.pit.is_empty());
    }

    #[test]
    fn miss_forwards_along_fib_and_creates_pit() {
        let mut f = routed();
        let now = SimTime::from_millis(5);
        let actions = f.on_interest(F1, interest(), now);
        let mut fwd = interest();
        fwd.hop_limit -= 1;
        assert_eq!(
            actions,
            vec![
                Action::RecordMiss,
                Action::PitCreated {
                    expiry_at: now + SimTime::from_millis(2000)
                },
                Action::Send(F3, Message::Interest(fwd)),
            ]
        );
        let entry = f.pit.get(&name()).unwrap();
        assert_eq!(entry.in_faces, [F1].into());
        assert_eq!(entry.out_faces, [F3].into());
    }

    #[test]
    fn aggregation_adds_in_face_without_forwarding() {
        let mut f = routed();
        f.on_interest(F1, interest(), SimTime::ZERO);
        let actions = f.on_interest(F2, interest(), SimTime::from_millis(1));
        assert_eq!(actions, vec![Action::RecordMiss]);
        let entry = f.pit.get(&name()).unwrap();
        assert_eq!(entry.in_faces, [F1, F2].into());
        // No refresh of the lifetime on aggregation.
        assert_eq!(entry.expiry_at, SimTime::from_millis(2000));
        assert_eq!(f.pit.len(), 1);
    }

    #[test]
    fn interest_on_out_face_is_dropped() {
        let mut f = routed();
        f.on_interest(F1, interest(), SimTime::ZERO);
        let actions = f.on_interest(F3, interest(), SimTime::ZERO);
        assert_eq!(actions, vec![Action::RecordMiss, Action::Drop(DropReason::Loop)]);
    }

    #[test]
    fn no_route_returns_interest() {
        let mut f = Forwarder::new(10);
        let actions = f.on_interest(F1, interest(), SimTime::ZERO);
        assert_eq!(
            actions,
            vec![
                Action::RecordMiss,
                Action::Send(
                    F1,
                    Message::InterestReturn(InterestReturn {
                        original: interest(),
                        return_code: ReturnCode::NoRoute
                    })
                ),
            ]
        );
        assert!(f.pit.is_empty());
    }

    #[test]
    fn route_back_to_arrival_face_is_no_route() {
        let mut f = routed();
        let actions = f.on_interest(F3, interest(), SimTime::ZERO);
        assert!(matches!(
            &actions[1],
            Action::Send(F3, Message::InterestReturn(r)) if r.return_code == ReturnCode::NoRoute
        ));
    }

    #[test]
    fn hop_limit_exhaustion() {
        let mut f = routed();
        let mut i = interest();
        i.hop_limit = 1;
        let actions = f.on_interest(F1, i.clone(), SimTime::ZERO);
        assert_eq!(
            actions[1],
            Action::Send(
                F1,
                Message::InterestReturn(InterestReturn {
                    original: i.clone(),
                    return_code: ReturnCode::HopLimitExceeded
                })
            )
        );
        // A local producer can still answer.
        let mut server = Forwarder::new(0);
        server.fib.insert(Prefix::parse("ccnx:/site").unwrap(), LOCAL_FACE, 0);
        let actions = server.on_interest(F1, i.clone(), SimTime::ZERO);
        assert!(matches!(actions.last(), Some(Action::DeliverLocal(Message::Interest(_)))));
        // And so can the cache.
        let mut cached = routed();
        cached.cs_insert(object(), SimTime::ZERO);
        assert_eq!(cached.on_interest(F1, i, SimTime::ZERO)[0], Action::RecordHit);
    }

    #[test]
    fn content_object_satisfies_all_requesters() {
        let mut f = routed();
        f.on_interest(F1, interest(), SimTime::ZERO);
        f.on_interest(F2, interest(), SimTime::ZERO);
        let actions = f.on_content_object(F3, object(), SimTime::from_millis(3));
        assert_eq!(
            actions,
            vec![
                Action::CacheInsert {
                    object: object(),
                    evicted: None
                },
                Action::Send(F1, Message::ContentObject(object())),
                Action::Send(F2, Message::ContentObject(object())),
            ]
        );
        assert!(f.pit.is_empty());
        assert!(f.cs.contains(&name()));
    }

    #[test]
    fn unsolicited_content_is_dropped() {
        let mut f = routed();
        let actions = f.on_content_object(F3, object(), SimTime::ZERO);
        assert_eq!(actions, vec![Action::Drop(DropReason::Unsolicited)]);
        assert!(f.cs.is_empty());
    }

    #[test]
    fn repeat_interest_after_satisfaction_hits_cache() {
        let mut f = routed();
        f.on_interest(LOCAL_FACE, interest(), SimTime::ZERO);
        let actions = f.on_content_object(F3, object(), SimTime::from_millis(1));
        assert_eq!(actions[1], Action::DeliverLocal(Message::ContentObject(object())));
        let again = f.on_interest(LOCAL_FACE, interest(), SimTime::from_millis(2));
        assert_eq!(
            again,
            vec![Action::RecordHit, Action::DeliverLocal(Message::ContentObject(object()))]
        );
    }

    #[test]
    fn interest_return_propagates() {
        let ret = InterestReturn {
            original: interest(),
            return_code: ReturnCode::NoRoute,
        };
        let mut f = routed();
        f.on_interest(LOCAL_FACE, interest(), SimTime::ZERO);
        assert_eq!(
            f.on_interest_return(F3, ret.clone(), SimTime::ZERO),
            vec![Action::DeliverLocal(Message::InterestReturn(ret.clone()))]
        );
        assert!(f.pit.is_empty());

        f.on_interest(F1, interest(), SimTime::ZERO);
        f.on_interest(F2, interest(), SimTime::ZERO);
        let actions = f.on_interest_return(F3, ret.clone(), SimTime::ZERO);
        assert_eq!(actions.len(), 2);

        assert_eq!(
            f.on_interest_return(F3, ret, SimTime::ZERO),
            vec![Action::Drop(DropReason::NoPitEntry)]
        );
    }

    #[test]
    fn pit_expiry_is_silent() {
        let mut f = routed();
        f.on_interest(F1, interest(), SimTime::ZERO);
        assert_eq!(f.pit_expire(SimTime::from_millis(1999)), 0);
        assert_eq!(f.pit_expire(SimTime::from_millis(2000)), 1);
        assert!(f.pit.is_empty());
    }

    #[test]
    fn satisfied_entry_ignores_stale_timer() {
        let mut f = routed();
        f.on_interest(F1, interest(), SimTime::ZERO);
        f.on_content_object(F3, object(), SimTime::from_millis(10));
        // Re-request after the cache was flushed, creating a fresh entry.
        let mut g = routed();
        g.on_interest(F1, interest(), SimTime::ZERO);
        g.on_content_object(F3, object(), SimTime::from_millis(10));
        g.cs = ContentStore::new(10);
        g.on_interest(F1, interest(), SimTime::from_millis(500));
        // The first entry's timer fires at 2000 ms and must not take the new one.
        assert_eq!(g.pit_expire(SimTime::from_millis(2000)), 0);
        assert_eq!(g.pit.len(), 1);
        assert_eq!(f.pit_expire(SimTime::from_millis(2000)), 0);
    }

    #[test]
    fn lookups_are_counted() {
        let mut f = routed();
        f.on_interest(F1, interest(), SimTime::ZERO);
        f.on_interest(F2, interest(), SimTime::ZERO);
        f.on_content_object(F3, object(), SimTime::ZERO);
        f.on_interest(F1, interest(), SimTime::ZERO);
        assert_eq!(f.cs_lookups(), 3);
    }
}
