//! Application models: content download, content serving and prefix
//! advertisement.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::forwarder::{FaceId, FibEntry, LOCAL_FACE};
use crate::message::{ContentObject, Interest, InterestReturn, Message, ReturnCode};
use crate::name::{ContentName, Prefix};
use crate::sim::SimTime;
use crate::transport::{Endpoint, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diversity {
    High,
    Medium,
    Low,
}

impl Diversity {
    pub fn default_catalog_size(self) -> u32 {
        match self {
            Diversity::Low => 100,
            Diversity::Medium => 1_000,
            Diversity::High => 10_000,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Diversity::Low => "low",
            Diversity::Medium => "medium",
            Diversity::High => "high",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogConfig {
    pub prefix: ContentName,
    pub catalog_size: u32,
    pub total_segments: u32,
    pub segment_size: u32,
    pub expiry_ms: u64,
    pub diversity: Option<Diversity>,
}

/// Name of item `index` under `prefix`.
pub fn content_name(prefix: &ContentName, index: u32) -> ContentName {
    prefix.child(format!("content{index}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalDist {
    Exponential { mean_s: f64 },
    Fixed { interval_s: f64 },
}

impl IntervalDist {
    pub fn mean_s(&self) -> f64 {
        match *self {
            IntervalDist::Exponential { mean_s } => mean_s,
            IntervalDist::Fixed { interval_s } => interval_s,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> SimTime {
        match *self {
            IntervalDist::Exponential { mean_s } => {
                let exp = Exp::new(1.0 / mean_s).expect("positive mean");
                SimTime::from_secs_f64(exp.sample(rng))
            }
            IntervalDist::Fixed { interval_s } => SimTime::from_secs_f64(interval_s),
        }
    }
}

/// A server catalog as seen by a downloader.
#[derive(Debug, Clone, PartialEq)]
pub struct DownloadTarget {
    pub prefix: ContentName,
    pub catalog_size: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownloadConfig {
    pub interval: IntervalDist,
    pub rto: SimTime,
    pub max_retries: u32,
    pub targets: Vec<DownloadTarget>,
    /// Zipf exponent over catalog items; 0 is uniform.
    pub popularity_exponent: f64,
    pub hop_limit: u8,
    pub lifetime_ms: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownloadRecord {
    pub content: ContentName,
    pub started_at: SimTime,
    pub finished_at: Option<SimTime>,
    pub segment_first_sent: Vec<SimTime>,
    pub segment_durations: Vec<SimTime>,
    pub retransmissions: u64,
    pub retransmission_bytes: u64,
    pub failed: bool,
}

impl DownloadRecord {
    pub fn duration(&self) -> Option<SimTime> {
        self.finished_at.map(|f| f - self.started_at)
    }
}

/// What the download app asks the node shell to do.
#[derive(Debug, Clone, PartialEq)]
pub enum AppEffect {
    /// Hand an Interest to the local face; `retransmission` marks re-issues.
    SendInterest {
        interest: Interest,
        retransmission: bool,
    },
    /// (Re)arm the retransmission timer, replacing any armed one.
    StartTimer { at: SimTime, token: TimerToken },
    StopTimer,
    ScheduleTick { at: SimTime },
    DownloadStarted,
    SegmentDone { duration: SimTime },
    /// `duration` is `None` for a failed download.
    DownloadDone { duration: Option<SimTime> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimerToken {
    download: u64,
    segment: u64,
    attempt: u32,
}

#[derive(Debug, Clone)]
struct ActiveDownload {
    seq: u64,
    record: DownloadRecord,
    segment: u64,
    total_segments: Option<u32>,
    attempt: u32,
    interest: Interest,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DownloadStats {
    pub ticks: u64,
    pub skipped_busy: u64,
    pub started: u64,
    pub completed: u64,
    pub failed: u64,
    pub interests_sent: u64,
    pub interest_bytes_sent: u64,
    pub retransmissions: u64,
    pub retransmission_bytes: u64,
    pub segments_completed: u64,
    pub segment_duration_sum: f64,
    pub content_duration_sum: f64,
    /// Content Objects handed to the app for names it never asked for.
    pub unrequested_deliveries: u64,
}

/// Periodic downloader. Segments are fetched one at a time.
#[derive(Debug, Clone)]
pub struct DownloadApp {
    config: DownloadConfig,
    rng: ChaCha8Rng,
    cdfs: Vec<Option<Vec<f64>>>,
    current: Option<ActiveDownload>,
    next_seq: u64,
    stopped: bool,
    requested: HashSet<ContentName>,
    pub stats: DownloadStats,
    pub records: Vec<DownloadRecord>,
}

impl DownloadApp {
    pub fn new(config: DownloadConfig, rng: ChaCha8Rng) -> Self {
        let cdfs = config
            .targets
            .iter()
            .map(|t| zipf_cdf(t.catalog_size, config.popularity_exponent))
            .collect();
        DownloadApp {
            config,
            rng,
            cdfs,
            current: None,
            next_seq: 0,
            stopped: false,
            requested: HashSet::new(),
            stats: DownloadStats::default(),
            records: Vec::new(),
        }
    }

    pub fn config(&self) -> &DownloadConfig {
        &self.config
    }

    pub fn is_busy(&self) -> bool {
        self.current.is_some()
    }

    /// First tick, drawn like every later one.
    pub fn start(&mut self, now: SimTime) -> Vec<AppEffect> {
        let at = now + self.config.interval.draw(&mut self.rng);
        vec![AppEffect::ScheduleTick { at }]
    }

    /// Stops issuing downloads and abandons the one in progress.
    pub fn stop(&mut self) -> Vec<AppEffect> {
        self.stopped = true;
        self.current = None;
        vec![AppEffect::StopTimer]
    }

    fn pick_content(&mut self) -> Option<ContentName> {
        if self.config.targets.is_empty() {
            return None;
        }
        let t = self.rng.random_range(0..self.config.targets.len());
        let target = &self.config.targets[t];
        let index = match &self.cdfs[t] {
            None => self.rng.random_range(0..target.catalog_size),
            Some(cdf) => {
                let u: f64 = self.rng.random();
                cdf.partition_point(|c| *c < u).min(cdf.len() - 1) as u32
            }
        };
        Some(content_name(&target.prefix, index))
    }

    pub fn download_tick(&mut self, now: SimTime) -> Vec<AppEffect> {
        if self.stopped {
            return Vec::new();
        }
        self.stats.ticks += 1;
        let mut effects = Vec::new();
        if self.current.is_some() {
            self.stats.skipped_busy += 1;
        } else if let Some(content) = self.pick_content() {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.stats.started += 1;
            effects.push(AppEffect::DownloadStarted);
            let record = DownloadRecord {
                content: content.clone(),
                started_at: now,
                finished_at: None,
                segment_first_sent: Vec::new(),
                segment_durations: Vec::new(),
                retransmissions: 0,
                retransmission_bytes: 0,
                failed: false,
            };
            self.current = Some(ActiveDownload {
                seq,
                record,
                segment: 0,
                total_segments: None,
                attempt: 0,
                interest: self.interest_for(content.with_segment(0)),
            });
            self.issue_current(now, false, &mut effects);
        }
        let at = now + self.config.interval.draw(&mut self.rng);
        effects.push(AppEffect::ScheduleTick { at });
        effects
    }

    fn interest_for(&self, name: ContentName) -> Interest {
        make_interest(&self.config, name)
    }

    fn issue_current(&mut self, now: SimTime, retransmission: bool, effects: &mut Vec<AppEffect>) {
        let cur = self.current.as_mut().expect("active download");
        let bytes = Message::Interest(cur.interest.clone()).encoded_size() as u64;
        self.stats.interests_sent += 1;
        self.stats.interest_bytes_sent += bytes;
        if retransmission {
            self.stats.retransmissions += 1;
            self.stats.retransmission_bytes += bytes;
            cur.record.retransmissions += 1;
            cur.record.retransmission_bytes += bytes;
        } else {
            cur.record.segment_first_sent.push(now);
        }
        self.requested.insert(cur.interest.name.clone());
        effects.push(AppEffect::SendInterest {
            interest: cur.interest.clone(),
            retransmission,
        });
        effects.push(AppEffect::StartTimer {
            at: now + self.config.rto,
            token: TimerToken {
                download: cur.seq,
                segment: cur.segment,
                attempt: cur.attempt,
            },
        });
    }

    pub fn on_content(&mut self, obj: &ContentObject, now: SimTime) -> Vec<AppEffect> {
        if !self.requested.contains(&obj.name) {
            self.stats.unrequested_deliveries += 1;
        }
        let Some(cur) = self.current.as_mut() else {
            return Vec::new();
        };
        if cur.interest.name != obj.name {
            return Vec::new();
        }
        let first = *cur.record.segment_first_sent.last().expect("segment was sent");
        let seg_time = now - first;
        cur.record.segment_durations.push(seg_time);
        self.stats.segments_completed += 1;
        self.stats.segment_duration_sum += seg_time.as_secs_f64();
        let total = *cur.total_segments.get_or_insert(obj.total_segments.max(1));
        let mut effects = vec![AppEffect::SegmentDone { duration: seg_time }];
        if cur.segment + 1 >= total as u64 {
            let mut done = self.current.take().expect("active").record;
            done.finished_at = Some(now);
            let duration = now - done.started_at;
            self.stats.completed += 1;
            self.stats.content_duration_sum += duration.as_secs_f64();
            self.records.push(done);
            effects.push(AppEffect::StopTimer);
            effects.push(AppEffect::DownloadDone {
                duration: Some(duration),
            });
        } else {
            cur.segment += 1;
            cur.attempt = 0;
            let name = cur.record.content.clone().with_segment(cur.segment);
            cur.interest = make_interest(&self.config, name);
            self.issue_current(now, false, &mut effects);
        }
        effects
    }

    pub fn on_interest_return(&mut self, ret: &InterestReturn, _now: SimTime) -> Vec<AppEffect> {
        match &self.current {
            Some(cur) if cur.interest.name == ret.original.name => {
                let mut effects = vec![AppEffect::StopTimer];
                self.fail_current(&mut effects);
                effects
            }
            _ => Vec::new(),
        }
    }

    pub fn on_download_timeout(&mut self, token: TimerToken, now: SimTime) -> Vec<AppEffect> {
        let Some(cur) = self.current.as_mut() else {
            return Vec::new();
        };
        if (cur.seq, cur.segment, cur.attempt) != (token.download, token.segment, token.attempt) {
            return Vec::new();
        }
        let mut effects = Vec::new();
        if cur.attempt >= self.config.max_retries {
            self.fail_current(&mut effects);
            return effects;
        }
        cur.attempt += 1;
        self.issue_current(now, true, &mut effects);
        effects
    }

    fn fail_current(&mut self, effects: &mut Vec<AppEffect>) {
        if let Some(cur) = self.current.take() {
            let mut rec = cur.record;
            rec.failed = true;
            self.stats.failed += 1;
            self.records.push(rec);
            effects.push(AppEffect::DownloadDone { duration: None });
        }
    }
}

fn make_interest(config: &DownloadConfig, name: ContentName) -> Interest {
    Interest {
        name,
        hop_limit: config.hop_limit,
        lifetime_ms: config.lifetime_ms,
    }
}

fn zipf_cdf(n: u32, exponent: f64) -> Option<Vec<f64>> {
    if exponent == 0.0 {
        return None;
    }
    let weights: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    Some(
        weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect(),
    )
}

/// Answers Interests for one hosted catalog.
#[derive(Debug, Clone)]
pub struct ServerApp {
    pub catalog: CatalogConfig,
    pub served: u64,
    pub rejected: u64,
}

impl ServerApp {
    pub fn new(catalog: CatalogConfig) -> Self {
        ServerApp {
            catalog,
            served: 0,
            rejected: 0,
        }
    }

    fn item_index(&self, name: &ContentName) -> Option<u32> {
        let prefix = &self.catalog.prefix;
        if name.len() != prefix.len() + 1 || !prefix.is_prefix_of(name) {
            return None;
        }
        let last = std::str::from_utf8(name.components().last()?).ok()?;
        let digits = last.strip_prefix("content")?;
        let index: u32 = digits.parse().ok()?;
        // Only the canonical spelling names an item.
        (index.to_string() == digits && index < self.catalog.catalog_size).then_some(index)
    }

    pub fn serve_interest(&mut self, interest: &Interest) -> Message {
        let in_catalog = self.item_index(&interest.name).is_some()
            && interest
                .name
                .segment()
                .is_some_and(|s| s < self.catalog.total_segments as u64);
        if in_catalog {
            self.served += 1;
            Message::ContentObject(ContentObject {
                name: interest.name.clone(),
                payload_size: self.catalog.segment_size,
                expiry_ms: self.catalog.expiry_ms,
                total_segments: self.catalog.total_segments,
            })
        } else {
            self.rejected += 1;
            Message::InterestReturn(InterestReturn {
                original: interest.clone(),
                return_code: ReturnCode::NoRoute,
            })
        }
    }
}

/// Wired adjacency of one node: `(local face, remote end)` pairs.
pub type WiredFaces = Vec<(FaceId, Endpoint)>;

/// Floods each origin's prefix over the wired graph in zero time.
///
/// An origin installs `prefix -> local face` with metric 0. A node hearing
/// `(prefix, m)` on face `f` installs `prefix -> f` with metric `m + 1` only if
/// that strictly improves its stored metric, then re-floods. Advertisements
/// are processed first-in first-out, seeded in node order and sent in face
/// order, so equal-cost ties go to the first one processed.
///
/// Returns the routes to install, per node.
pub fn advertise_prefixes(adjacency: &[WiredFaces], origins: &[(NodeId, Prefix)]) -> Vec<Vec<FibEntry>> {
    let mut best: Vec<HashMap<Prefix, (FaceId, u32)>> = vec![HashMap::new(); adjacency.len()];
    let mut queue: VecDeque<(NodeId, usize, u32)> = VecDeque::new();
    let mut sorted: Vec<(usize, &(NodeId, Prefix))> = origins.iter().enumerate().collect();
    sorted.sort_by_key(|(i, (n, _))| (*n, *i));
    for (i, (node, prefix)) in sorted {
        best[node.0 as usize].insert(prefix.clone(), (LOCAL_FACE, 0));
        queue.push_back((*node, i, 0));
    }
    while let Some((node, origin, metric)) = queue.pop_front() {
        let prefix = &origins[origin].1;
        let mut faces = adjacency[node.0 as usize].clone();
        faces.sort_by_key(|(f, _)| *f);
        for (_, peer) in faces {
            let cand = metric + 1;
            let table = &mut best[peer.node.0 as usize];
            let improves = table.get(prefix).is_none_or(|(_, m)| cand < *m);
            if improves {
                table.insert(prefix.clone(), (peer.face, cand));
                queue.push_back((peer.node, origin, cand));
            }
        }
    }
    best.into_iter()
        .map(|table| {
            let mut routes: Vec<FibEntry> = table
                .into_iter()
                .map(|(prefix, (face, metric))| FibEntry {
                    prefix,
                    face,
                    metric,
                })
                .collect();
            routes.sort_by(|a, b| a.prefix.cmp(&b.prefix));
            routes
        })
        .collect()
}
