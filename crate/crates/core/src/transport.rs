//! Faces, wired point-to-point links and range-based wireless delivery.

use std::fmt;

use crate::forwarder::FaceId;
use crate::mobility::Position;
use crate::sim::SimTime;

/// Index of a node in the network, assigned in scenario order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WirelessMode {
    Client,
    AccessPoint,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    LocalApp,
    /// Index into the network's link list.
    Wired { link: usize },
    Wireless(WirelessMode),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub id: FaceId,
    pub kind: FaceKind,
}

/// Time to clock `bytes` onto a link of `rate_bps`, rounded up to the next
/// nanosecond.
pub fn transmission_time(bytes: usize, rate_bps: u64) -> SimTime {
    assert!(rate_bps > 0, "data rate must be positive");
    let bits = bytes as u128 * 8 * 1_000_000_000;
    let ns = bits.div_ceil(rate_bps as u128);
    SimTime::from_nanos(ns.min(u64::MAX as u128) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoint {
    pub node: NodeId,
    pub face: FaceId,
}

/// Lossless full-duplex link. Each direction transmits one message at a time;
/// later messages wait until the earlier ones are on the wire.
#[derive(Debug, Clone)]
pub struct WiredLink {
    pub data_rate_bps: u64,
    pub delay: SimTime,
    pub endpoints: [Endpoint; 2],
    busy_until: [SimTime; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub to: Endpoint,
    pub at: SimTime,
}

impl WiredLink {
    pub fn new(a: Endpoint, b: Endpoint, data_rate_bps: u64, delay: SimTime) -> Self {
        WiredLink {
            data_rate_bps,
            delay,
            endpoints: [a, b],
            busy_until: [SimTime::ZERO; 2],
        }
    }

    /// Which end `node`/`face` is, if any.
    pub fn end_of(&self, node: NodeId, face: FaceId) -> Option<usize> {
        self.endpoints
            .iter()
            .position(|e| e.node == node && e.face == face)
    }

    /// Queues a message of `bytes` from end `from` at `now`, returning when
    /// and where it arrives.
    pub fn send(&mut self, from: usize, bytes: usize, now: SimTime) -> Delivery {
        let start = now.max(self.busy_until[from]);
        let done = start + transmission_time(bytes, self.data_rate_bps);
        self.busy_until[from] = done;
        Delivery {
            to: self.endpoints[1 - from],
            at: done + self.delay,
        }
    }

    pub fn busy_until(&self, from: usize) -> SimTime {
        self.busy_until[from]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirelessConfig {
    pub data_rate_bps: u64,
    pub range_m: f64,
    pub mode: WirelessMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RegistryEntry {
    node: NodeId,
    face: FaceId,
    config: WirelessConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub face: FaceId,
    pub distance: f64,
}

/// Network-wide directory of wireless faces and node positions.
#[derive(Debug, Clone, Default)]
pub struct WirelessRegistry {
    entries: Vec<RegistryEntry>,
    positions: Vec<Position>,
}

impl WirelessRegistry {
    pub fn new(node_count: usize) -> Self {
        WirelessRegistry {
            entries: Vec::new(),
            positions: vec![Position::new(0.0, 0.0); node_count],
        }
    }

    pub fn register(&mut self, node: NodeId, face: FaceId, config: WirelessConfig) {
        self.entries.push(RegistryEntry { node, face, config });
        self.entries.sort_by_key(|e| (e.node, e.face));
    }

    pub fn members(&self) -> impl Iterator<Item = (NodeId, FaceId, WirelessConfig)> + '_ {
        self.entries.iter().map(|e| (e.node, e.face, e.config))
    }

    pub fn is_member(&self, node: NodeId) -> bool {
        self.entries.iter().any(|e| e.node == node)
    }

    pub fn update_position(&mut self, node: NodeId, pos: Position) {
        self.positions[node.0 as usize] = pos;
    }

    pub fn position(&self, node: NodeId) -> Position {
        self.positions[node.0 as usize]
    }

    pub fn config(&self, node: NodeId, face: FaceId) -> Option<WirelessConfig> {
        self.entries
            .iter()
            .find(|e| e.node == node && e.face == face)
            .map(|e| e.config)
    }

    /// Faces reachable from `node`'s wireless face `face`, by node id.
    ///
    /// Client faces see access points, access points see client faces, and
    /// direct faces see other direct faces. A pair is in range when their
    /// distance is within the smaller of the two ranges.
    pub fn wireless_neighbors(&self, node: NodeId, face: FaceId) -> Vec<Neighbor> {
        let Some(me) = self.config(node, face) else {
            return Vec::new();
        };
        let here = self.position(node);
        let peer_mode = match me.mode {
            WirelessMode::Client => WirelessMode::AccessPoint,
            WirelessMode::AccessPoint => WirelessMode::Client,
            WirelessMode::Direct => WirelessMode::Direct,
        };
        self.entries
            .iter()
            .filter(|e| e.node != node && e.config.mode == peer_mode)
            .filter_map(|e| {
                let distance = here.distance(&self.position(e.node));
                (distance <= me.range_m.min(e.config.range_m)).then_some(Neighbor {
                    node: e.node,
                    face: e.face,
                    distance,
                })
            })
            .collect()
    }

    /// Receivers of a transmission on `face`: the nearest access point for a
    /// client (lowest node id on ties), every neighbor otherwise.
    pub fn wireless_send(&self, node: NodeId, face: FaceId, bytes: usize, now: SimTime) -> Vec<Delivery> {
        let Some(me) = self.config(node, face) else {
            return Vec::new();
        };
        let mut neighbors = self.wireless_neighbors(node, face);
        if me.mode == WirelessMode::Client {
            neighbors = neighbors
                .into_iter()
                .min_by(|a, b| a.distance.total_cmp(&b.distance).then(a.node.cmp(&b.node)))
                .into_iter()
                .collect();
        }
        let at = now + transmission_time(bytes, me.data_rate_bps);
        neighbors
            .into_iter()
            .map(|n| Delivery {
                to: Endpoint {
                    node: n.node,
                    face: n.face,
                },
                at,
            })
            .collect()
    }
}
