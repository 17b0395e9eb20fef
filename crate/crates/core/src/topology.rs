//! Node-model presets and network construction from a scenario.
//!
//! Face numbering is fixed per node: face 0 is the local application face,
//! then the wireless faces (client before direct), then one face per wired
//! link in scenario order.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::apps::{
    advertise_prefixes, CatalogConfig, DownloadApp, DownloadConfig, DownloadTarget, IntervalDist, ServerApp,
    WiredFaces,
};
use crate::forwarder::{FaceId, Forwarder, LOCAL_FACE};
use crate::metrics::NodeMetrics;
use crate::mobility::{Arena, Mobility, Position, RandomWaypoint, WaypointParams};
use crate::name::Prefix;
use crate::scenario::{IntervalKind, MobilityParams, NodeModel, NodeSection, ScenarioConfig};
use crate::sim::{rng_stream, SimTime};
use crate::transport::{Endpoint, Face, FaceKind, NodeId, WiredLink, WirelessConfig, WirelessMode, WirelessRegistry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct BuildError {
    pub line: usize,
    pub message: String,
}

/// Structural requirements of a node model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodePreset {
    pub model: NodeModel,
    pub wireless: &'static [WirelessMode],
    pub min_wired: usize,
    pub max_wired: Option<usize>,
}

impl NodePreset {
    pub fn of(model: NodeModel) -> NodePreset {
        let (wireless, min_wired, max_wired): (&'static [WirelessMode], usize, Option<usize>) = match model {
            NodeModel::WirelessNode => (&[WirelessMode::Client], 0, Some(0)),
            NodeModel::WirelessAccessRouter => (&[WirelessMode::AccessPoint], 1, None),
            NodeModel::WirelessDtnNode => (&[WirelessMode::Client, WirelessMode::Direct], 0, Some(0)),
            NodeModel::WiredNode => (&[], 1, Some(1)),
            NodeModel::AccessRouter => (&[], 2, None),
            NodeModel::ContentServer => (&[], 1, Some(1)),
            NodeModel::CoreRouter => (&[], 2, None),
        };
        NodePreset {
            model,
            wireless,
            min_wired,
            max_wired,
        }
    }

    pub fn check_wired(&self, count: usize) -> Result<(), String> {
        let ok = count >= self.min_wired && self.max_wired.is_none_or(|m| count <= m);
        if ok {
            return Ok(());
        }
        let need = match self.max_wired {
            Some(m) if m == self.min_wired => format!("exactly {m}"),
            Some(m) => format!("{}..={m}", self.min_wired),
            None => format!("at least {}", self.min_wired),
        };
        Err(format!(
            "{} needs {need} wired link(s), has {count}",
            self.model
        ))
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub model: NodeModel,
    pub faces: Vec<Face>,
    pub forwarder: Forwarder,
    pub download: Option<DownloadApp>,
    pub server: Option<ServerApp>,
    pub mobility: Mobility,
}

impl Node {
    pub fn face(&self, id: FaceId) -> Option<&Face> {
        self.faces.get(id.0 as usize)
    }

    pub fn wireless_face(&self, mode: WirelessMode) -> Option<FaceId> {
        self.faces
            .iter()
            .find(|f| f.kind == FaceKind::Wireless(mode))
            .map(|f| f.id)
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub links: Vec<WiredLink>,
    pub registry: WirelessRegistry,
    pub metrics: Vec<NodeMetrics>,
    pub arena: Arena,
    pub warnings: Vec<String>,
}

impl Network {
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    /// Wired adjacency per node, in face order.
    pub fn wired_adjacency(&self) -> Vec<WiredFaces> {
        adjacency(self.nodes.len(), &self.links)
    }
}

fn adjacency(node_count: usize, links: &[WiredLink]) -> Vec<WiredFaces> {
    let mut adj: Vec<WiredFaces> = vec![Vec::new(); node_count];
    for link in links {
        let [a, b] = link.endpoints;
        adj[a.node.0 as usize].push((a.face, b));
        adj[b.node.0 as usize].push((b.face, a));
    }
    for faces in &mut adj {
        faces.sort_by_key(|(f, _)| *f);
    }
    adj
}

fn download_config(section: &NodeSection, cfg: &ScenarioConfig) -> Option<DownloadConfig> {
    let d = section.download.as_ref()?;
    let servers = cfg.nodes.iter().filter_map(|n| n.catalog.as_ref());
    let targets = servers
        .filter(|c| d.targets.is_empty() || d.targets.contains(&c.prefix))
        .map(|c| DownloadTarget {
            prefix: c.prefix.clone(),
            catalog_size: c.catalog_size,
        })
        .collect();
    let interval = match d.interval_kind {
        IntervalKind::Exponential => IntervalDist::Exponential {
            mean_s: d.inter_download_mean_s,
        },
        IntervalKind::Fixed => IntervalDist::Fixed {
            interval_s: d.inter_download_mean_s,
        },
    };
    Some(DownloadConfig {
        interval,
        rto: SimTime::from_secs_f64(d.rto_s),
        max_retries: d.max_retries,
        targets,
        popularity_exponent: d.popularity_exponent,
        hop_limit: d.hop_limit,
        lifetime_ms: (d.interest_lifetime_s * 1000.0).round() as u16,
    })
}

fn catalog_config(section: &NodeSection) -> Option<CatalogConfig> {
    let c = section.catalog.as_ref()?;
    Some(CatalogConfig {
        prefix: c.prefix.clone(),
        catalog_size: c.catalog_size,
        total_segments: c.total_segments,
        segment_size: c.segment_size,
        expiry_ms: (c.content_expiry_s * 1000.0).round() as u64,
        diversity: c.diversity,
    })
}

fn mobility(section: &NodeSection, arena: &Arena, seed: u64) -> Mobility {
    let mut rng = rng_stream(seed, &format!("mobility.{}", section.id));
    let given = section.position.map(|(x, y)| Position::new(x, y));
    match section.mobility {
        MobilityParams::Static => Mobility::Static(given.unwrap_or_else(|| arena.center())),
        MobilityParams::RandomWaypoint {
            speed_min_mps,
            speed_max_mps,
            pause_min_s,
            pause_max_s,
        } => {
            let start = given.unwrap_or_else(|| arena.random_point(&mut rng));
            let params = WaypointParams {
                speed_min: speed_min_mps,
                speed_max: speed_max_mps,
                pause_min: pause_min_s,
                pause_max: pause_max_s,
            };
            Mobility::RandomWaypoint(Box::new(RandomWaypoint::new(*arena, params, start, rng)))
        }
    }
}

/// Instantiates every node, wires the links, fills the wireless registry and
/// installs advertised routes.
pub fn build_network(cfg: &ScenarioConfig) -> Result<Network, BuildError> {
    let index: HashMap<&str, NodeId> = cfg
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), NodeId(i as u32)))
        .collect();
    if index.len() != cfg.nodes.len() {
        let mut seen = HashMap::new();
        for n in &cfg.nodes {
            if seen.insert(n.id.as_str(), ()).is_some() {
                return Err(BuildError {
                    line: n.line,
                    message: format!("duplicate node id \"{}\"", n.id),
                });
            }
        }
    }
    let arena = Arena {
        width: cfg.arena.width_m,
        height: cfg.arena.height_m,
    };
    let seed = cfg.simulation.seed;

    let mut nodes: Vec<Node> = Vec::with_capacity(cfg.nodes.len());
    let mut registry = WirelessRegistry::new(cfg.nodes.len());
    for (i, section) in cfg.nodes.iter().enumerate() {
        let id = NodeId(i as u32);
        let preset = NodePreset::of(section.model);
        let mut faces = vec![Face {
            id: LOCAL_FACE,
            kind: FaceKind::LocalApp,
        }];
        for &mode in preset.wireless {
            let face = FaceId(faces.len() as u16);
            faces.push(Face {
                id: face,
                kind: FaceKind::Wireless(mode),
            });
            let w = section.wireless.as_ref().ok_or_else(|| BuildError {
                line: section.line,
                message: format!("{} needs wireless parameters", section.model),
            })?;
            registry.register(
                id,
                face,
                WirelessConfig {
                    data_rate_bps: w.data_rate_bps,
                    range_m: w.range_m,
                    mode,
                },
            );
        }
        let download = download_config(section, cfg)
            .map(|c| DownloadApp::new(c, rng_stream(seed, &format!("app.{}", section.id))));
        let mut node = Node {
            id,
            name: section.id.clone(),
            model: section.model,
            faces,
            forwarder: Forwarder::new(section.cs_capacity),
            download,
            server: catalog_config(section).map(ServerApp::new),
            mobility: mobility(section, &arena, seed),
        };
        registry.update_position(id, node.mobility.position_at(SimTime::ZERO));
        nodes.push(node);
    }

    let mut links = Vec::with_capacity(cfg.links.len());
    for l in &cfg.links {
        let mut end = |name: &str| -> Result<Endpoint, BuildError> {
            let id = *index.get(name).ok_or_else(|| BuildError {
                line: l.line,
                message: format!("link {} references unknown node \"{name}\"", l.id),
            })?;
            let node = &mut nodes[id.0 as usize];
            let face = FaceId(node.faces.len() as u16);
            node.faces.push(Face {
                id: face,
                kind: FaceKind::Wired { link: links.len() },
            });
            Ok(Endpoint { node: id, face })
        };
        if l.from == l.to {
            return Err(BuildError {
                line: l.line,
                message: format!("link {} connects \"{}\" to itself", l.id, l.from),
            });
        }
        let a = end(&l.from)?;
        let b = end(&l.to)?;
        links.push(WiredLink::new(a, b, l.data_rate_bps, SimTime::from_secs_f64(l.delay_s)));
    }

    for (section, node) in cfg.nodes.iter().zip(&nodes) {
        let wired = node
            .faces
            .iter()
            .filter(|f| matches!(f.kind, FaceKind::Wired { .. }))
            .count();
        NodePreset::of(section.model)
            .check_wired(wired)
            .map_err(|message| BuildError {
                line: section.line,
                message: format!("node {}: {message}", section.id),
            })?;
    }

    let adj = adjacency(nodes.len(), &links);
    let origins: Vec<(NodeId, Prefix)> = nodes
        .iter()
        .filter_map(|n| n.server.as_ref().map(|s| (n.id, Prefix::from(&s.catalog.prefix))))
        .collect();
    for (node, routes) in nodes.iter_mut().zip(advertise_prefixes(&adj, &origins)) {
        for r in routes {
            node.forwarder.fib.insert(r.prefix, r.face, r.metric);
        }
        if let Some(client) = node.wireless_face(WirelessMode::Client) {
            node.forwarder.fib.insert(Prefix::root(), client, 1);
        }
    }

    let mut warnings = Vec::new();
    if !cfg.simulation.allow_partition {
        if let Some(w) = partition_warning(cfg, &adj) {
            warnings.push(w);
        }
    }

    let metrics = cfg
        .nodes
        .iter()
        .map(|n| NodeMetrics::new(n.cs_capacity))
        .collect();
    Ok(Network {
        nodes,
        links,
        registry,
        metrics,
        arena,
        warnings,
    })
}

fn is_infrastructure(model: NodeModel) -> bool {
    matches!(
        model,
        NodeModel::WirelessAccessRouter | NodeModel::AccessRouter | NodeModel::CoreRouter | NodeModel::ContentServer
    )
}

/// Describes a split of the wired router/server subgraph, if there is one.
fn partition_warning(cfg: &ScenarioConfig, adj: &[WiredFaces]) -> Option<String> {
    let members: Vec<usize> = (0..cfg.nodes.len())
        .filter(|&i| is_infrastructure(cfg.nodes[i].model))
        .collect();
    let &start = members.first()?;
    let mut seen = vec![false; cfg.nodes.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for (_, peer) in &adj[u] {
            let v = peer.node.0 as usize;
            if !seen[v] && is_infrastructure(cfg.nodes[v].model) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let cut: Vec<&str> = members
        .iter()
        .filter(|&&i| !seen[i])
        .map(|&i| cfg.nodes[i].id.as_str())
        .collect();
    (!cut.is_empty()).then(|| {
        format!(
            "wired network is partitioned: {} not reachable from {} (set allow_partition = true if intended)",
            cut.join(", "),
            cfg.nodes[start].id
        )
    })
}
