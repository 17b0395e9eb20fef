//! CSV emission for runs and sweeps.
//!
//! Floats use Rust's shortest round-trip formatting; undefined values are
//! written as empty fields.

use std::io::Write;

use crate::metrics::{NodeSummary, SeriesRow, SummaryReport};

pub const NETWORK_METRICS_FILE: &str = "network_metrics.csv";
pub const NODE_METRICS_FILE: &str = "node_metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

pub const NETWORK_COLUMNS: [&str; 11] = [
    "time_s",
    "cache_hits_cum",
    "cache_misses_cum",
    "cache_hit_ratio_cum",
    "cache_hit_ratio_window",
    "avg_pit_count_window",
    "interest_bytes_sent_cum",
    "retransmission_bytes_cum",
    "downloads_completed_cum",
    "avg_content_download_s_cum",
    "avg_segment_download_s_cum",
];

pub const NODE_COLUMNS: [&str; 17] = [
    "node_id",
    "model",
    "cache_hits",
    "cache_misses",
    "cache_hit_ratio",
    "avg_pit_count",
    "peak_pit_count",
    "interest_bytes_sent",
    "retransmission_count",
    "retransmission_bytes",
    "retransmission_bytes_received",
    "downloads_started",
    "downloads_completed",
    "downloads_failed",
    "avg_content_download_s",
    "avg_segment_download_s",
    "cs_peak",
];

pub const SUMMARY_COLUMNS: [&str; 17] = [
    "seed",
    "duration_s",
    "config_hash",
    "events_processed",
    "cache_hits",
    "cache_misses",
    "cache_hit_ratio",
    "avg_content_download_s",
    "avg_segment_download_s",
    "avg_pit_count",
    "interest_bytes_sent",
    "retransmission_count",
    "retransmission_bytes",
    "retransmission_bytes_received",
    "downloads_started",
    "downloads_completed",
    "downloads_failed",
];

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Identifies a run in the summary row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub seed: u64,
    pub config_hash: String,
    pub events_processed: u64,
}

pub fn write_network_metrics<W: Write>(out: W, rows: &[SeriesRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NETWORK_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.time.as_secs_f64().to_string(),
            r.cache.hits.to_string(),
            r.cache.misses.to_string(),
            fmt_opt(r.hit_ratio_cum),
            fmt_opt(r.hit_ratio_window),
            fmt_opt(r.avg_pit_count_window),
            r.interest_bytes_sent_cum.to_string(),
            r.retransmission_bytes_cum.to_string(),
            r.downloads_completed_cum.to_string(),
            fmt_opt(r.avg_content_download_s_cum),
            fmt_opt(r.avg_segment_download_s_cum),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `names` and `models` are in node order, matching `report.nodes`.
pub fn write_node_metrics<W: Write>(
    out: W,
    report: &SummaryReport,
    names: &[String],
    models: &[&str],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NODE_COLUMNS)?;
    for ((n, name), model) in report.nodes.iter().zip(names).zip(models) {
        w.write_record(node_record(n, name, model))?;
    }
    w.flush()?;
    Ok(())
}

fn node_record(n: &NodeSummary, name: &str, model: &str) -> Vec<String> {
    let m = &n.metrics;
    vec![
        name.to_string(),
        model.to_string(),
        n.cache.hits.to_string(),
        n.cache.misses.to_string(),
        fmt_opt(n.cache.hit_ratio()),
        fmt_opt(n.avg_pit_count),
        m.pit.peak.to_string(),
        m.interest_bytes_sent.to_string(),
        m.retransmissions.sent_count.to_string(),
        m.retransmissions.sent_bytes.to_string(),
        m.retransmissions.received_bytes.to_string(),
        m.downloads_started.to_string(),
        m.downloads_completed.to_string(),
        m.downloads_failed.to_string(),
        fmt_opt(m.latency.avg_content_s()),
        fmt_opt(m.latency.avg_segment_s()),
        m.cs_peak.to_string(),
    ]
}

pub fn summary_record(report: &SummaryReport, meta: &RunMeta) -> Vec<String> {
    let t = &report.totals;
    vec![
        meta.seed.to_string(),
        report.duration.as_secs_f64().to_string(),
        meta.config_hash.clone(),
        meta.events_processed.to_string(),
        t.cache.hits.to_string(),
        t.cache.misses.to_string(),
        fmt_opt(report.hit_ratio),
        fmt_opt(report.avg_content_download_s),
        fmt_opt(report.avg_segment_download_s),
        fmt_opt(report.avg_pit_count),
        t.interest_bytes_sent.to_string(),
        t.retransmissions.sent_count.to_string(),
        t.retransmissions.sent_bytes.to_string(),
        t.retransmissions.received_bytes.to_string(),
        t.downloads_started.to_string(),
        t.downloads_completed.to_string(),
        t.downloads_failed.to_string(),
    ]
}

pub fn write_summary<W: Write>(out: W, report: &SummaryReport, meta: &RunMeta) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    w.write_record(summary_record(report, meta))?;
    w.flush()?;
    Ok(())
}

/// One sweep row: `(param, value, summary fields)`.
pub fn write_sweep_summary<W: Write>(out: W, param: &str, rows: &[(String, Vec<String>)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = ["param", "value"].into_iter().chain(SUMMARY_COLUMNS).collect();
    w.write_record(header)?;
    for (value, fields) in rows {
        let record: Vec<&str> = [param, value.as_str()]
            .into_iter()
            .chain(fields.iter().map(String::as_str))
            .collect();
        w.write_record(record)?;
    }
    w.flush()?;
    Ok(())
}
