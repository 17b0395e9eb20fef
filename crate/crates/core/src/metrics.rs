//! Evaluation metrics: cache hit/miss ratios, download durations,
//! Interest retransmission overhead and PIT occupancy.
//!
//! Each node keeps a [`NodeMetrics`] blackboard updated by the node shell;
//! [`MetricsCollector`] aggregates them into a network time series and an
//! end-of-run summary. Hit ratios in the series are cumulative since t = 0;
//! a per-window ratio is emitted alongside for diagnostics.

use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn lookups(&self) -> u64 {
        self.hits + self.misses
    }

    /// `None` when there were no lookups.
    pub fn hit_ratio(&self) -> Option<f64> {
        let total = self.lookups();
        (total > 0).then(|| self.hits as f64 / total as f64)
    }

    fn since(&self, earlier: &CacheStats) -> CacheStats {
        CacheStats {
            hits: self.hits - earlier.hits,
            misses: self.misses - earlier.misses,
        }
    }
}

/// Exact time integral of the PIT size, in entry-nanoseconds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PitStats {
    pub current: usize,
    pub peak: usize,
    integral: u128,
    last_change: SimTime,
}

impl PitStats {
    /// Accounts for time up to `now`, then records the new size.
    pub fn set(&mut self, now: SimTime, len: usize) {
        self.advance(now);
        self.current = len;
        self.peak = self.peak.max(len);
    }

    pub fn advance(&mut self, now: SimTime) {
        let dt = now.saturating_sub(self.last_change).as_nanos() as u128;
        self.integral += dt * self.current as u128;
        self.last_change = self.last_change.max(now);
    }

    /// Integral up to the last advance, in entry-seconds.
    pub fn integral_entry_secs(&self) -> f64 {
        self.integral as f64 / 1e9
    }

    fn integral_raw(&self) -> u128 {
        self.integral
    }

    /// `∫|PIT| dt / T` over `[0, until]`; `None` for an empty interval.
    pub fn time_weighted_average(&self, until: SimTime) -> Option<f64> {
        (until > SimTime::ZERO).then(|| self.integral as f64 / until.as_nanos() as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LatencyStats {
    pub content_count: u64,
    pub content_sum_s: f64,
    pub segment_count: u64,
    pub segment_sum_s: f64,
}

impl LatencyStats {
    pub fn avg_content_s(&self) -> Option<f64> {
        (self.content_count > 0).then(|| self.content_sum_s / self.content_count as f64)
    }

    pub fn avg_segment_s(&self) -> Option<f64> {
        (self.segment_count > 0).then(|| self.segment_sum_s / self.segment_count as f64)
    }

    fn merge(&mut self, o: &LatencyStats) {
        self.content_count += o.content_count;
        self.content_sum_s += o.content_sum_s;
        self.segment_count += o.segment_count;
        self.segment_sum_s += o.segment_sum_s;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RetransmissionStats {
    pub sent_count: u64,
    pub sent_bytes: u64,
    pub received_count: u64,
    pub received_bytes: u64,
}

/// Per-node statistics blackboard.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeMetrics {
    pub cache: CacheStats,
    pub pit: PitStats,
    pub latency: LatencyStats,
    pub retransmissions: RetransmissionStats,
    pub interests_sent: u64,
    pub interest_bytes_sent: u64,
    pub downloads_started: u64,
    pub downloads_completed: u64,
    pub downloads_failed: u64,
    pub cs_capacity: usize,
    pub cs_peak: usize,
    /// Samples at which the CS held more than its capacity.
    pub cs_overflow_samples: u64,
}

impl NodeMetrics {
    pub fn new(cs_capacity: usize) -> Self {
        NodeMetrics {
            cs_capacity,
            ..Default::default()
        }
    }

    pub fn record_cache_lookup(&mut self, hit: bool) {
        if hit {
            self.cache.hits += 1;
        } else {
            self.cache.misses += 1;
        }
    }

    pub fn record_interest_sent(&mut self, bytes: usize, retransmission: bool) {
        self.interests_sent += 1;
        self.interest_bytes_sent += bytes as u64;
        if retransmission {
            self.retransmissions.sent_count += 1;
            self.retransmissions.sent_bytes += bytes as u64;
        }
    }

    pub fn record_retransmission_received(&mut self, bytes: usize) {
        self.retransmissions.received_count += 1;
        self.retransmissions.received_bytes += bytes as u64;
    }

    pub fn record_segment(&mut self, duration: SimTime) {
        self.latency.segment_count += 1;
        self.latency.segment_sum_s += duration.as_secs_f64();
    }

    pub fn record_download(&mut self, duration: Option<SimTime>) {
        match duration {
            Some(d) => {
                self.downloads_completed += 1;
                self.latency.content_count += 1;
                self.latency.content_sum_s += d.as_secs_f64();
            }
            None => self.downloads_failed += 1,
        }
    }

    pub fn observe_cs(&mut self, len: usize) {
        self.cs_peak = self.cs_peak.max(len);
    }
}

/// Network-wide totals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkTotals {
    pub cache: CacheStats,
    pub latency: LatencyStats,
    pub retransmissions: RetransmissionStats,
    pub interests_sent: u64,
    pub interest_bytes_sent: u64,
    pub downloads_started: u64,
    pub downloads_completed: u64,
    pub downloads_failed: u64,
    pub pit_now: usize,
}

pub fn network_totals(nodes: &[NodeMetrics]) -> NetworkTotals {
    let mut t = NetworkTotals::default();
    for n in nodes {
        t.cache.hits += n.cache.hits;
        t.cache.misses += n.cache.misses;
        t.latency.merge(&n.latency);
        t.retransmissions.sent_count += n.retransmissions.sent_count;
        t.retransmissions.sent_bytes += n.retransmissions.sent_bytes;
        t.retransmissions.received_count += n.retransmissions.received_count;
        t.retransmissions.received_bytes += n.retransmissions.received_bytes;
        t.interests_sent += n.interests_sent;
        t.interest_bytes_sent += n.interest_bytes_sent;
        t.downloads_started += n.downloads_started;
        t.downloads_completed += n.downloads_completed;
        t.downloads_failed += n.downloads_failed;
        t.pit_now += n.pit.current;
    }
    t
}

/// One row of the network time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub time: SimTime,
    pub cache: CacheStats,
    pub hit_ratio_cum: Option<f64>,
    pub hit_ratio_window: Option<f64>,
    /// Mean over nodes of the time-weighted PIT size in the window.
    pub avg_pit_count_window: Option<f64>,
    pub pit_total_now: usize,
    pub interest_bytes_sent_cum: u64,
    pub retransmission_bytes_cum: u64,
    pub downloads_completed_cum: u64,
    pub avg_content_download_s_cum: Option<f64>,
    pub avg_segment_download_s_cum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSummary {
    pub cache: CacheStats,
    pub avg_pit_count: Option<f64>,
    pub metrics: NodeMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub duration: SimTime,
    pub totals: NetworkTotals,
    pub hit_ratio: Option<f64>,
    pub avg_content_download_s: Option<f64>,
    pub avg_segment_download_s: Option<f64>,
    /// Mean over nodes of each node's time-weighted PIT size.
    pub avg_pit_count: Option<f64>,
    pub nodes: Vec<NodeSummary>,
}

/// Aggregates node blackboards into a time series.
#[derive(Debug, Clone, Default)]
pub struct MetricsCollector {
    pub rows: Vec<SeriesRow>,
    last_time: SimTime,
    last_cache: CacheStats,
    last_pit_integrals: Vec<u128>,
}

impl MetricsCollector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row at `now`. Node PIT integrals must be advanced to `now`.
    pub fn sample_time_series(&mut self, now: SimTime, nodes: &mut [NodeMetrics]) {
        for n in nodes.iter_mut() {
            n.pit.advance(now);
            if n.cs_peak > n.cs_capacity {
                n.cs_overflow_samples += 1;
            }
        }
        if self.last_pit_integrals.len() != nodes.len() {
            self.last_pit_integrals = vec![0; nodes.len()];
        }
        let totals = network_totals(nodes);
        let window = now.saturating_sub(self.last_time);
        let avg_pit_count_window = (window > SimTime::ZERO && !nodes.is_empty()).then(|| {
            let sum: f64 = nodes
                .iter()
                .zip(&self.last_pit_integrals)
                .map(|(n, prev)| (n.pit.integral_raw() - prev) as f64 / window.as_nanos() as f64)
                .sum();
            sum / nodes.len() as f64
        });
        let first = self.rows.is_empty();
        let hit_ratio_window = if first {
            totals.cache.hit_ratio()
        } else {
            totals.cache.since(&self.last_cache).hit_ratio()
        };
        self.rows.push(SeriesRow {
            time: now,
            cache: totals.cache,
            hit_ratio_cum: totals.cache.hit_ratio(),
            hit_ratio_window,
            avg_pit_count_window,
            pit_total_now: totals.pit_now,
            interest_bytes_sent_cum: totals.interest_bytes_sent,
            retransmission_bytes_cum: totals.retransmissions.sent_bytes,
            downloads_completed_cum: totals.downloads_completed,
            avg_content_download_s_cum: totals.latency.avg_content_s(),
            avg_segment_download_s_cum: totals.latency.avg_segment_s(),
        });
        self.last_time = now;
        self.last_cache = totals.cache;
        self.last_pit_integrals = nodes.iter().map(|n| n.pit.integral_raw()).collect();
    }

    pub fn finalize(&self, duration: SimTime, nodes: &mut [NodeMetrics]) -> SummaryReport {
        for n in nodes.iter_mut() {
            n.pit.advance(duration);
        }
        let totals = network_totals(nodes);
        let node_summaries: Vec<NodeSummary> = nodes
            .iter()
            .map(|n| NodeSummary {
                cache: n.cache,
                avg_pit_count: n.pit.time_weighted_average(duration),
                metrics: n.clone(),
            })
            .collect();
        let avg_pit_count = (duration > SimTime::ZERO && !nodes.is_empty()).then(|| {
            node_summaries
                .iter()
                .filter_map(|n| n.avg_pit_count)
                .sum::<f64>()
                / nodes.len() as f64
        });
        SummaryReport {
            duration,
            hit_ratio: totals.cache.hit_ratio(),
            avg_content_download_s: totals.latency.avg_content_s(),
            avg_segment_download_s: totals.latency.avg_segment_s(),
            avg_pit_count,
            totals,
            nodes: node_summaries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_ratio_arithmetic() {
        let mut m = NodeMetrics::new(10);
        for hit in [true, true, true, false] {
            m.record_cache_lookup(hit);
        }
        assert_eq!(m.cache.hit_ratio(), Some(0.75));
        assert_eq!(NodeMetrics::new(1).cache.hit_ratio(), None);
    }

    #[test]
    fn network_hits_sum_nodes() {
        let mut nodes = vec![NodeMetrics::new(1), NodeMetrics::new(1), NodeMetrics::new(1)];
        let pattern = [(0, true), (1, false), (2, true), (0, true), (1, true), (2, false)];
        for (i, hit) in pattern {
            nodes[i].record_cache_lookup(hit);
        }
        let t = network_totals(&nodes);
        assert_eq!(t.cache.hits, nodes.iter().map(|n| n.cache.hits).sum::<u64>());
        assert_eq!(t.cache.hits, 4);
        assert_eq!(t.cache.misses, 2);
    }

    #[test]
    fn pit_average_half_run() {
        let mut p = PitStats::default();
        p.set(SimTime::from_secs_f64(2.0), 1);
        p.set(SimTime::from_secs_f64(7.0), 0);
        p.advance(SimTime::from_secs_f64(10.0));
        assert_eq!(p.time_weighted_average(SimTime::from_secs_f64(10.0)), Some(0.5));
        assert_eq!(p.peak, 1);
    }

    #[test]
    fn series_row_count_and_monotonicity() {
        let mut c = MetricsCollector::new();
        let mut nodes = vec![NodeMetrics::new(10)];
        let interval = SimTime::from_secs_f64(60.0);
        let end = SimTime::from_secs_f64(86_400.0);
        let mut t = SimTime::ZERO;
        let mut k = 0u64;
        while t <= end {
            c.sample_time_series(t, &mut nodes);
            if k % 7 == 0 {
                nodes[0].record_cache_lookup(k % 3 == 0);
                nodes[0].record_interest_sent(50, k % 5 == 0);
            }
            t = t + interval;
            k += 1;
        }
        assert_eq!(c.rows.len(), 1441);
        assert_eq!(c.rows[0].hit_ratio_cum, None);
        assert_eq!(c.rows[0].avg_pit_count_window, None);
        for w in c.rows.windows(2) {
            assert!(w[1].cache.hits >= w[0].cache.hits);
            assert!(w[1].cache.misses >= w[0].cache.misses);
            assert!(w[1].interest_bytes_sent_cum >= w[0].interest_bytes_sent_cum);
            assert!(w[1].retransmission_bytes_cum >= w[0].retransmission_bytes_cum);
            assert!(w[1].downloads_completed_cum >= w[0].downloads_completed_cum);
        }
    }

    #[test]
    fn empty_run_summary_has_empty_fields() {
        let c = MetricsCollector::new();
        let mut nodes = vec![NodeMetrics::new(10), NodeMetrics::new(0)];
        let s = c.finalize(SimTime::from_secs_f64(100.0), &mut nodes);
        assert_eq!(s.hit_ratio, None);
        assert_eq!(s.avg_content_download_s, None);
        assert_eq!(s.avg_segment_download_s, None);
        assert_eq!(s.avg_pit_count, Some(0.0));
        let s = c.finalize(SimTime::ZERO, &mut nodes);
        assert_eq!(s.avg_pit_count, None);
    }

    #[test]
    fn window_pit_average() {
        let mut c = MetricsCollector::new();
        let mut nodes = vec![NodeMetrics::new(0), NodeMetrics::new(0)];
        c.sample_time_series(SimTime::ZERO, &mut nodes);
        nodes[0].pit.set(SimTime::from_secs_f64(5.0), 2);
        c.sample_time_series(SimTime::from_secs_f64(10.0), &mut nodes);
        // Node 0 averaged 1.0 over the window, node 1 averaged 0.
        assert_eq!(c.rows[1].avg_pit_count_window, Some(0.5));
        c.sample_time_series(SimTime::from_secs_f64(20.0), &mut nodes);
        assert_eq!(c.rows[2].avg_pit_count_window, Some(1.0));
    }
}
