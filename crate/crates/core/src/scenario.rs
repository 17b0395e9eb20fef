//! Scenario files.
//!
//! Line-oriented sections: `[simulation]`, `[arena]`, `[node <id>]` and
//! `[link <id>]` headers followed by `key = value` pairs. `#` starts a
//! comment. Unknown keys, and keys that do not apply to a node's model, are
//! errors.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::apps::Diversity;
use crate::name::ContentName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeModel {
    WirelessNode,
    WirelessAccessRouter,
    WirelessDtnNode,
    WiredNode,
    AccessRouter,
    ContentServer,
    CoreRouter,
}

impl NodeModel {
    pub const ALL: [NodeModel; 7] = [
        NodeModel::WirelessNode,
        NodeModel::WirelessAccessRouter,
        NodeModel::WirelessDtnNode,
        NodeModel::WiredNode,
        NodeModel::AccessRouter,
        NodeModel::ContentServer,
        NodeModel::CoreRouter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeModel::WirelessNode => "wireless_node",
            NodeModel::WirelessAccessRouter => "wireless_access_router",
            NodeModel::WirelessDtnNode => "wireless_dtn_node",
            NodeModel::WiredNode => "wired_node",
            NodeModel::AccessRouter => "access_router",
            NodeModel::ContentServer => "content_server",
            NodeModel::CoreRouter => "core_router",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn downloads(self) -> bool {
        matches!(
            self,
            NodeModel::WirelessNode | NodeModel::WirelessDtnNode | NodeModel::WiredNode
        )
    }

    pub fn is_wireless(self) -> bool {
        matches!(
            self,
            NodeModel::WirelessNode | NodeModel::WirelessAccessRouter | NodeModel::WirelessDtnNode
        )
    }

    pub fn is_mobile_capable(self) -> bool {
        matches!(self, NodeModel::WirelessNode | NodeModel::WirelessDtnNode)
    }

    pub fn default_cs_capacity(self) -> usize {
        match self {
            NodeModel::ContentServer => 0,
            NodeModel::WirelessNode | NodeModel::WirelessDtnNode | NodeModel::WiredNode => 100,
            NodeModel::WirelessAccessRouter | NodeModel::AccessRouter | NodeModel::CoreRouter => 1000,
        }
    }
}

impl fmt::Display for NodeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSection {
    pub duration_s: f64,
    pub seed: u64,
    pub metric_sample_interval_s: f64,
    pub allow_partition: bool,
    /// Download apps stop issuing requests at this time, if set.
    pub apps_stop_s: Option<f64>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            duration_s: 172_800.0,
            seed: 1,
            metric_sample_interval_s: 60.0,
            allow_partition: false,
            apps_stop_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArenaSection {
    pub width_m: f64,
    pub height_m: f64,
    pub position_update_interval_s: f64,
}

impl Default for ArenaSection {
    fn default() -> Self {
        ArenaSection {
            width_m: 1000.0,
            height_m: 1000.0,
            position_update_interval_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WirelessParams {
    pub data_rate_bps: u64,
    pub range_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Exponential,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownloadParams {
    pub interval_kind: IntervalKind,
    pub inter_download_mean_s: f64,
    pub rto_s: f64,
    pub max_retries: u32,
    /// Empty means every server's prefix.
    pub targets: Vec<ContentName>,
    pub popularity_exponent: f64,
    pub interest_lifetime_s: f64,
    pub hop_limit: u8,
}

impl Default for DownloadParams {
    fn default() -> Self {
        DownloadParams {
            interval_kind: IntervalKind::Exponential,
            inter_download_mean_s: 300.0,
            rto_s: 4.0,
            max_retries: 5,
            targets: Vec::new(),
            popularity_exponent: 0.0,
            interest_lifetime_s: 2.0,
            hop_limit: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogParams {
    pub prefix: ContentName,
    pub catalog_size: u32,
    pub diversity: Option<Diversity>,
    pub total_segments: u32,
    pub segment_size: u32,
    pub content_expiry_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MobilityParams {
    Static,
    RandomWaypoint {
        speed_min_mps: f64,
        speed_max_mps: f64,
        pause_min_s: f64,
        pause_max_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSection {
    pub id: String,
    pub line: usize,
    pub model: NodeModel,
    pub cs_capacity: usize,
    /// Start position; `None` places static nodes at the arena center and
    /// random-waypoint nodes at a random point.
    pub position: Option<(f64, f64)>,
    pub mobility: MobilityParams,
    pub wireless: Option<WirelessParams>,
    pub download: Option<DownloadParams>,
    pub catalog: Option<CatalogParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSection {
    pub id: String,
    pub line: usize,
    pub from: String,
    pub to: String,
    pub data_rate_bps: u64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioConfig {
    pub simulation: SimulationSection,
    pub arena: ArenaSection,
    pub nodes: Vec<NodeSection>,
    pub links: Vec<LinkSection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown key \"{key}\" in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("key \"{key}\" does not apply to model {model}")]
    NotApplicable { key: String, model: String },
    #[error("{key}: {message}")]
    Range { key: String, message: String },
    #[error("{0}")]
    Reference(String),
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("missing required key \"{0}\"")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ScenarioError {
    pub line: usize,
    pub kind: ErrorKind,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{}", format_errors(.0))]
    Invalid(Vec<ScenarioError>),
}

fn format_errors(errs: &[ScenarioError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::parse_str(&text).map_err(LoadError::Invalid)
}

#[derive(Debug)]
enum SectionKind {
    Simulation,
    Arena,
    Node(String),
    Link(String),
}

#[derive(Debug)]
struct RawSection {
    kind: SectionKind,
    line: usize,
    /// key -> (value, line)
    pairs: Vec<(String, String, usize)>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn lex(text: &str) -> Result<Vec<RawSection>, Vec<ScenarioError>> {
    let mut sections: Vec<RawSection> = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let Some(header) = header.strip_suffix(']') else {
                errors.push(ScenarioError {
                    line,
                    kind: ErrorKind::Syntax("unterminated section header".into()),
                });
                continue;
            };
            let mut words = header.split_whitespace();
            let kind = match (words.next(), words.next(), words.next()) {
                (Some("simulation"), None, _) => SectionKind::Simulation,
                (Some("arena"), None, _) => SectionKind::Arena,
                (Some("node"), Some(id), None) if valid_id(id) => SectionKind::Node(id.to_string()),
                (Some("link"), Some(id), None) if valid_id(id) => SectionKind::Link(id.to_string()),
                _ => {
                    errors.push(ScenarioError {
                        line,
                        kind: ErrorKind::Syntax(format!("bad section header [{header}]")),
                    });
                    continue;
                }
            };
            sections.push(RawSection {
                kind,
                line,
                pairs: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ScenarioError {
                line,
                kind: ErrorKind::Syntax("expected key = value".into()),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            errors.push(ScenarioError {
                line,
                kind: ErrorKind::Syntax("empty key or value".into()),
            });
            continue;
        }
        match sections.last_mut() {
            Some(s) => s.pairs.push((key.to_string(), value.to_string(), line)),
            None => errors.push(ScenarioError {
                line,
                kind: ErrorKind::Syntax("key outside of any section".into()),
            }),
        }
    }
    if errors.is_empty() {
        Ok(sections)
    } else {
        Err(errors)
    }
}

/// Typed access to one section's pairs, recording errors as it goes.
struct Fields<'a> {
    section: String,
    pairs: HashMap<&'a str, (&'a str, usize)>,
    used: HashSet<&'a str>,
    errors: &'a mut Vec<ScenarioError>,
}

impl<'a> Fields<'a> {
    fn new(section: String, raw: &'a RawSection, errors: &'a mut Vec<ScenarioError>) -> Self {
        let mut pairs = HashMap::new();
        for (k, v, line) in &raw.pairs {
            if pairs.insert(k.as_str(), (v.as_str(), *line)).is_some() {
                errors.push(ScenarioError {
                    line: *line,
                    kind: ErrorKind::Duplicate(format!("key \"{k}\"")),
                });
            }
        }
        Fields {
            section,
            pairs,
            used: HashSet::new(),
            errors,
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<(&'a str, usize)> {
        self.used.insert(key);
        self.pairs.get(key).copied()
    }

    fn range_err(&mut self, line: usize, key: &str, message: impl Into<String>) {
        self.errors.push(ScenarioError {
            line,
            kind: ErrorKind::Range {
                key: key.to_string(),
                message: message.into(),
            },
        });
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &'static str, what: &str) -> Option<(T, usize)> {
        let (v, line) = self.raw(key)?;
        match v.parse::<T>() {
            Ok(x) => Some((x, line)),
            Err(_) => {
                self.range_err(line, key, format!("expected {what}, got \"{v}\""));
                None
            }
        }
    }

    /// Float satisfying `ok`, else `default`.
    fn float(&mut self, key: &'static str, default: f64, ok: fn(f64) -> bool, rule: &str) -> f64 {
        match self.parsed::<f64>(key, "a number") {
            Some((x, line)) if !x.is_finite() || !ok(x) => {
                self.range_err(line, key, format!("must be {rule}, got {x}"));
                default
            }
            Some((x, _)) => x,
            None => default,
        }
    }

    fn positive(&mut self, key: &'static str, default: f64) -> f64 {
        self.float(key, default, |x| x > 0.0, "> 0")
    }

    fn non_negative(&mut self, key: &'static str, default: f64) -> f64 {
        self.float(key, default, |x| x >= 0.0, ">= 0")
    }

    fn integer(&mut self, key: &'static str, default: u64, min: u64, max: u64) -> u64 {
        let Some((v, line)) = self.raw(key) else {
            return default;
        };
        match v.parse::<i128>() {
            Ok(x) if x >= min as i128 && x <= max as i128 => x as u64,
            Ok(x) => {
                self.range_err(line, key, format!("must be in [{min}, {max}], got {x}"));
                default
            }
            Err(_) => {
                self.range_err(line, key, format!("expected an integer, got \"{v}\""));
                default
            }
        }
    }

    fn boolean(&mut self, key: &'static str, default: bool) -> bool {
        self.parsed::<bool>(key, "true or false")
            .map(|(b, _)| b)
            .unwrap_or(default)
    }

    fn name(&mut self, key: &'static str) -> Option<ContentName> {
        let (v, line) = self.raw(key)?;
        match ContentName::parse(v) {
            Ok(n) => Some(n),
            Err(e) => {
                self.range_err(line, key, e.to_string());
                None
            }
        }
    }

    fn present(&self, key: &str) -> bool {
        self.pairs.contains_key(key)
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.pairs.get(key).map(|(_, l)| *l)
    }

    /// Reports every key that was never looked at.
    fn finish(self, not_applicable_to: Option<NodeModel>) {
        let mut leftover: Vec<(&str, usize)> = self
            .pairs
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, (_, line))| (*k, *line))
            .collect();
        leftover.sort_by_key(|(_, line)| *line);
        for (key, line) in leftover {
            let kind = match not_applicable_to {
                Some(model) if NODE_KEYS.contains(&key) => ErrorKind::NotApplicable {
                    key: key.to_string(),
                    model: model.to_string(),
                },
                _ => ErrorKind::UnknownKey {
                    section: self.section.clone(),
                    key: key.to_string(),
                },
            };
            self.errors.push(ScenarioError { line, kind });
        }
    }
}

const NODE_KEYS: &[&str] = &[
    "model",
    "cs_capacity",
    "x",
    "y",
    "mobility",
    "speed_min_mps",
    "speed_max_mps",
    "pause_min_s",
    "pause_max_s",
    "wireless_data_rate_bps",
    "wireless_range_m",
    "inter_download_mean_s",
    "inter_download_dist",
    "rto_s",
    "max_retries",
    "targets",
    "popularity_exponent",
    "interest_lifetime_s",
    "hop_limit",
    "prefix",
    "catalog_size",
    "diversity",
    "total_segments",
    "segment_size",
    "content_expiry_s",
];

pub const DEFAULT_WIRELESS_RATE_BPS: u64 = 11_000_000;
pub const DEFAULT_WIRELESS_RANGE_M: f64 = 100.0;
pub const DEFAULT_LINK_RATE_BPS: u64 = 100_000_000;
pub const DEFAULT_LINK_DELAY_S: f64 = 0.001;
/// Largest segment that still fits a 16-bit packet length.
pub const MAX_SEGMENT_SIZE: u64 = 60_000;

fn parse_node(id: &str, raw: &RawSection, errors: &mut Vec<ScenarioError>) -> Option<NodeSection> {
    let mut f = Fields::new(format!("node {id}"), raw, errors);
    let model = match f.raw("model") {
        None => {
            f.errors.push(ScenarioError {
                line: raw.line,
                kind: ErrorKind::Missing("model".into()),
            });
            f.finish(None);
            return None;
        }
        Some((v, line)) => match NodeModel::parse(v) {
            Some(m) => m,
            None => {
                f.range_err(line, "model", format!("unknown model \"{v}\""));
                f.finish(None);
                return None;
            }
        },
    };

    let cs_capacity = f.integer("cs_capacity", model.default_cs_capacity() as u64, 0, u32::MAX as u64) as usize;
    let x = f.parsed::<f64>("x", "a number").map(|v| v.0);
    let y = f.parsed::<f64>("y", "a number").map(|v| v.0);
    let position = match (x, y) {
        (Some(x), Some(y)) => Some((x, y)),
        (None, None) => None,
        _ => {
            let line = f.line_of("x").or(f.line_of("y")).unwrap_or(raw.line);
            f.errors.push(ScenarioError {
                line,
                kind: ErrorKind::Missing("x and y must be given together".into()),
            });
            None
        }
    };

    let mobility = if model.is_mobile_capable() {
        match f.raw("mobility") {
            None | Some(("static", _)) => MobilityParams::Static,
            Some(("random_waypoint", _)) => {
                let speed_min_mps = f.positive("speed_min_mps", 1.0);
                let speed_max_mps = f.positive("speed_max_mps", 2.0);
                let pause_min_s = f.non_negative("pause_min_s", 0.0);
                let pause_max_s = f.non_negative("pause_max_s", 60.0);
                if speed_max_mps < speed_min_mps {
                    let line = f.line_of("speed_max_mps").unwrap_or(raw.line);
                    f.range_err(line, "speed_max_mps", "must be >= speed_min_mps");
                }
                if pause_max_s < pause_min_s {
                    let line = f.line_of("pause_max_s").unwrap_or(raw.line);
                    f.range_err(line, "pause_max_s", "must be >= pause_min_s");
                }
                MobilityParams::RandomWaypoint {
                    speed_min_mps,
                    speed_max_mps,
                    pause_min_s,
                    pause_max_s,
                }
            }
            Some((other, line)) => {
                f.range_err(line, "mobility", format!("unknown mobility model \"{other}\""));
                MobilityParams::Static
            }
        }
    } else {
        MobilityParams::Static
    };

    let wireless = model.is_wireless().then(|| WirelessParams {
        data_rate_bps: f.integer("wireless_data_rate_bps", DEFAULT_WIRELESS_RATE_BPS, 1, u64::MAX),
        range_m: f.positive("wireless_range_m", DEFAULT_WIRELESS_RANGE_M),
    });

    let download = model.downloads().then(|| {
        let d = DownloadParams::default();
        let interval_kind = match f.raw("inter_download_dist") {
            None | Some(("exponential", _)) => IntervalKind::Exponential,
            Some(("fixed", _)) => IntervalKind::Fixed,
            Some((other, line)) => {
                f.range_err(line, "inter_download_dist", format!("expected exponential or fixed, got \"{other}\""));
                IntervalKind::Exponential
            }
        };
        let mut targets = Vec::new();
        if let Some((v, line)) = f.raw("targets") {
            for t in v.split(',').map(str::trim) {
                match ContentName::parse(t) {
                    Ok(n) => targets.push(n),
                    Err(e) => f.range_err(line, "targets", e.to_string()),
                }
            }
        }
        DownloadParams {
            interval_kind,
            inter_download_mean_s: f.positive("inter_download_mean_s", d.inter_download_mean_s),
            rto_s: f.positive("rto_s", d.rto_s),
            max_retries: f.integer("max_retries", d.max_retries as u64, 0, u32::MAX as u64) as u32,
            targets,
            popularity_exponent: f.non_negative("popularity_exponent", d.popularity_exponent),
            interest_lifetime_s: f.float(
                "interest_lifetime_s",
                d.interest_lifetime_s,
                |x| x >= 0.001 && x <= 65.535,
                "in [0.001, 65.535]",
            ),
            hop_limit: f.integer("hop_limit", d.hop_limit as u64, 1, 255) as u8,
        }
    });

    let catalog = if model == NodeModel::ContentServer {
        let prefix = f.name("prefix");
        if prefix.is_none() && !f.present("prefix") {
            f.errors.push(ScenarioError {
                line: raw.line,
                kind: ErrorKind::Missing("prefix".into()),
            });
        }
        let diversity = match f.raw("diversity") {
            None => None,
            Some(("low", _)) => Some(Diversity::Low),
            Some(("medium", _)) => Some(Diversity::Medium),
            Some(("high", _)) => Some(Diversity::High),
            Some((other, line)) => {
                f.range_err(line, "diversity", format!("expected low, medium or high, got \"{other}\""));
                None
            }
        };
        let default_size = diversity.unwrap_or(Diversity::Low).default_catalog_size() as u64;
        let catalog_size = f.integer("catalog_size", default_size, 1, u32::MAX as u64) as u32;
        let total_segments = f.integer("total_segments", 10, 1, crate::message::MAX_TOTAL_SEGMENTS as u64) as u32;
        let segment_size = f.integer("segment_size", 1000, 1, MAX_SEGMENT_SIZE) as u32;
        let content_expiry_s = f.non_negative("content_expiry_s", 3600.0);
        prefix.map(|prefix| CatalogParams {
            prefix,
            catalog_size,
            diversity,
            total_segments,
            segment_size,
            content_expiry_s,
        })
    } else {
        None
    };

    f.finish(Some(model));
    Some(NodeSection {
        id: id.to_string(),
        line: raw.line,
        model,
        cs_capacity,
        position,
        mobility,
        wireless,
        download,
        catalog,
    })
}

impl ScenarioConfig {
    /// Parses and validates scenario text. All problems found are reported.
    pub fn parse_str(text: &str) -> Result<ScenarioConfig, Vec<ScenarioError>> {
        let sections = lex(text)?;
        let mut errors = Vec::new();
        let mut cfg = ScenarioConfig::default();
        let mut seen_sim = false;
        let mut seen_arena = false;
        let mut node_ids = HashSet::new();
        let mut link_ids = HashSet::new();

        for raw in &sections {
            match &raw.kind {
                SectionKind::Simulation => {
                    if std::mem::replace(&mut seen_sim, true) {
                        errors.push(ScenarioError {
                            line: raw.line,
                            kind: ErrorKind::Duplicate("[simulation] section".into()),
                        });
                    }
                    let d = SimulationSection::default();
                    let mut f = Fields::new("simulation".into(), raw, &mut errors);
                    cfg.simulation = SimulationSection {
                        duration_s: f.non_negative("duration_s", d.duration_s),
                        seed: f.integer("seed", d.seed, 0, u64::MAX),
                        metric_sample_interval_s: f.positive("metric_sample_interval_s", d.metric_sample_interval_s),
                        allow_partition: f.boolean("allow_partition", d.allow_partition),
                        apps_stop_s: f.present("apps_stop_s").then(|| f.non_negative("apps_stop_s", 0.0)),
                    };
                    f.finish(None);
                }
                SectionKind::Arena => {
                    if std::mem::replace(&mut seen_arena, true) {
                        errors.push(ScenarioError {
                            line: raw.line,
                            kind: ErrorKind::Duplicate("[arena] section".into()),
                        });
                    }
                    let d = ArenaSection::default();
                    let mut f = Fields::new("arena".into(), raw, &mut errors);
                    cfg.arena = ArenaSection {
                        width_m: f.positive("width_m", d.width_m),
                        height_m: f.positive("height_m", d.height_m),
                        position_update_interval_s: f.positive("position_update_interval_s", d.position_update_interval_s),
                    };
                    f.finish(None);
                }
                SectionKind::Node(id) => {
                    if !node_ids.insert(id.clone()) {
                        errors.push(ScenarioError {
                            line: raw.line,
                            kind: ErrorKind::Duplicate(format!("node id \"{id}\"")),
                        });
                        continue;
                    }
                    if let Some(node) = parse_node(id, raw, &mut errors) {
                        cfg.nodes.push(node);
                    }
                }
                SectionKind::Link(id) => {
                    if !link_ids.insert(id.clone()) {
                        errors.push(ScenarioError {
                            line: raw.line,
                            kind: ErrorKind::Duplicate(format!("link id \"{id}\"")),
                        });
                        continue;
                    }
                    let mut f = Fields::new(format!("link {id}"), raw, &mut errors);
                    let endpoint = |f: &mut Fields, key: &'static str| match f.raw(key) {
                        Some((v, _)) => v.to_string(),
                        None => {
                            f.errors.push(ScenarioError {
                                line: raw.line,
                                kind: ErrorKind::Missing(key.into()),
                            });
                            String::new()
                        }
                    };
                    let from = endpoint(&mut f, "from");
                    let to = endpoint(&mut f, "to");
                    let link = LinkSection {
                        id: id.clone(),
                        line: raw.line,
                        from,
                        to,
                        data_rate_bps: f.integer("data_rate_bps", DEFAULT_LINK_RATE_BPS, 1, u64::MAX),
                        delay_s: f.non_negative("delay_s", DEFAULT_LINK_DELAY_S),
                    };
                    f.finish(None);
                    cfg.links.push(link);
                }
            }
        }

        cfg.check_references(&mut errors);
        if errors.is_empty() {
            Ok(cfg)
        } else {
            errors.sort_by_key(|e| e.line);
            Err(errors)
        }
    }

    fn check_references(&self, errors: &mut Vec<ScenarioError>) {
        let ids: HashSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        for l in &self.links {
            for end in [&l.from, &l.to] {
                if !end.is_empty() && !ids.contains(end.as_str()) {
                    errors.push(ScenarioError {
                        line: l.line,
                        kind: ErrorKind::Reference(format!("link {} references unknown node \"{end}\"", l.id)),
                    });
                }
            }
            if !l.from.is_empty() && l.from == l.to {
                errors.push(ScenarioError {
                    line: l.line,
                    kind: ErrorKind::Reference(format!("link {} connects node \"{}\" to itself", l.id, l.from)),
                });
            }
        }
        let prefixes: Vec<&ContentName> = self
            .nodes
            .iter()
            .filter_map(|n| n.catalog.as_ref().map(|c| &c.prefix))
            .collect();
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if let Some(c) = &n.catalog {
                if !seen.insert(&c.prefix) {
                    errors.push(ScenarioError {
                        line: n.line,
                        kind: ErrorKind::Duplicate(format!("prefix {}", c.prefix)),
                    });
                }
            }
            if let Some(d) = &n.download {
                for t in &d.targets {
                    if !prefixes.contains(&t) {
                        errors.push(ScenarioError {
                            line: n.line,
                            kind: ErrorKind::Reference(format!("node {} targets {t}, which no content server hosts", n.id)),
                        });
                    }
                }
            }
            if let Some((x, y)) = n.position {
                if !(0.0..=self.arena.width_m).contains(&x) || !(0.0..=self.arena.height_m).contains(&y) {
                    errors.push(ScenarioError {
                        line: n.line,
                        kind: ErrorKind::Range {
                            key: "x/y".into(),
                            message: format!("({x}, {y}) is outside the arena"),
                        },
                    });
                }
            }
        }
    }

    pub fn node(&self, id: &str) -> Option<&NodeSection> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut NodeSection> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    /// Renders every resolved setting as scenario text. Parsing the result
    /// gives back an equal config.
    pub fn to_canonical_string(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let sim = &self.simulation;
        let _ = writeln!(s, "[simulation]");
        let _ = writeln!(s, "duration_s = {}", sim.duration_s);
        let _ = writeln!(s, "seed = {}", sim.seed);
        let _ = writeln!(s, "metric_sample_interval_s = {}", sim.metric_sample_interval_s);
        let _ = writeln!(s, "allow_partition = {}", sim.allow_partition);
        if let Some(stop) = sim.apps_stop_s {
            let _ = writeln!(s, "apps_stop_s = {stop}");
        }
        let a = &self.arena;
        let _ = writeln!(s, "\n[arena]");
        let _ = writeln!(s, "width_m = {}", a.width_m);
        let _ = writeln!(s, "height_m = {}", a.height_m);
        let _ = writeln!(s, "position_update_interval_s = {}", a.position_update_interval_s);
        for n in &self.nodes {
            let _ = writeln!(s, "\n[node {}]", n.id);
            let _ = writeln!(s, "model = {}", n.model);
            let _ = writeln!(s, "cs_capacity = {}", n.cs_capacity);
            if let Some((x, y)) = n.position {
                let _ = writeln!(s, "x = {x}\ny = {y}");
            }
            if let MobilityParams::RandomWaypoint {
                speed_min_mps,
                speed_max_mps,
                pause_min_s,
                pause_max_s,
            } = n.mobility
            {
                let _ = writeln!(s, "mobility = random_waypoint");
                let _ = writeln!(s, "speed_min_mps = {speed_min_mps}\nspeed_max_mps = {speed_max_mps}");
                let _ = writeln!(s, "pause_min_s = {pause_min_s}\npause_max_s = {pause_max_s}");
            }
            if let Some(w) = &n.wireless {
                let _ = writeln!(s, "wireless_data_rate_bps = {}", w.data_rate_bps);
                let _ = writeln!(s, "wireless_range_m = {}", w.range_m);
            }
            if let Some(d) = &n.download {
                let dist = match d.interval_kind {
                    IntervalKind::Exponential => "exponential",
                    IntervalKind::Fixed => "fixed",
                };
                let _ = writeln!(s, "inter_download_dist = {dist}");
                let _ = writeln!(s, "inter_download_mean_s = {}", d.inter_download_mean_s);
                let _ = writeln!(s, "rto_s = {}", d.rto_s);
                let _ = writeln!(s, "max_retries = {}", d.max_retries);
                if !d.targets.is_empty() {
                    let t: Vec<String> = d.targets.iter().map(|t| t.to_string()).collect();
                    let _ = writeln!(s, "targets = {}", t.join(","));
                }
                let _ = writeln!(s, "popularity_exponent = {}", d.popularity_exponent);
                let _ = writeln!(s, "interest_lifetime_s = {}", d.interest_lifetime_s);
                let _ = writeln!(s, "hop_limit = {}", d.hop_limit);
            }
            if let Some(c) = &n.catalog {
                let _ = writeln!(s, "prefix = {}", c.prefix);
                if let Some(div) = c.diversity {
                    let _ = writeln!(s, "diversity = {}", div.label());
                }
                let _ = writeln!(s, "catalog_size = {}", c.catalog_size);
                let _ = writeln!(s, "total_segments = {}", c.total_segments);
                let _ = writeln!(s, "segment_size = {}", c.segment_size);
                let _ = writeln!(s, "content_expiry_s = {}", c.content_expiry_s);
            }
        }
        for l in &self.links {
            let _ = writeln!(s, "\n[link {}]", l.id);
            let _ = writeln!(s, "from = {}\nto = {}", l.from, l.to);
            let _ = writeln!(s, "data_rate_bps = {}", l.data_rate_bps);
            let _ = writeln!(s, "delay_s = {}", l.delay_s);
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical text.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn set_catalog_size(&mut self, size: u32) {
        for n in &mut self.nodes {
            if let Some(c) = &mut n.catalog {
                c.catalog_size = size;
            }
        }
    }

    /// Sets the cache size of every node that caches (servers excluded).
    pub fn set_cs_capacity(&mut self, capacity: usize) {
        for n in &mut self.nodes {
            if n.model != NodeModel::ContentServer {
                n.cs_capacity = capacity;
            }
        }
    }

    pub fn set_inter_download_mean(&mut self, mean_s: f64) {
        for n in &mut self.nodes {
            if let Some(d) = &mut n.download {
                d.inter_download_mean_s = mean_s;
            }
        }
    }
}
