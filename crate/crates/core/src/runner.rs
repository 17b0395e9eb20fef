//! Single runs and parameter sweeps, with their output directories.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{SeriesRow, SummaryReport};
use crate::output::{self, RunMeta};
use crate::scenario::ScenarioConfig;
use crate::simulation::{SimError, Simulation};
use crate::topology::BuildError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("build failed: {0}")]
    Build(#[from] BuildError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub duration_s: Option<f64>,
    pub packet_dump: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<(), RunError> {
        if let Some(seed) = self.seed {
            cfg.simulation.seed = seed;
        }
        if let Some(d) = self.duration_s {
            if !(d.is_finite() && d >= 0.0) {
                return Err(RunError::Invalid(format!("duration must be a non-negative number, got {d}")));
            }
            cfg.simulation.duration_s = d;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: SummaryReport,
    pub rows: Vec<SeriesRow>,
    pub meta: RunMeta,
    pub warnings: Vec<String>,
}

/// Runs `cfg` to its duration and writes the three CSV files into `out`.
pub fn run(cfg: &ScenarioConfig, overrides: &Overrides, out: &Path) -> Result<RunOutcome, RunError> {
    let mut cfg = cfg.clone();
    overrides.apply(&mut cfg)?;
    let config_hash = cfg.config_hash();
    let seed = cfg.simulation.seed;
    let mut sim = Simulation::new(cfg)?;
    if let Some(path) = &overrides.packet_dump {
        let file = File::create(path).map_err(io_err(path))?;
        sim = sim.with_packet_dump(Box::new(BufWriter::new(file)));
    }
    let warnings = sim.network.warnings.clone();
    sim.run()?;
    let report = sim.finalize();
    let meta = RunMeta {
        seed,
        config_hash,
        events_processed: sim.events_processed(),
    };

    fs::create_dir_all(out).map_err(io_err(out))?;
    let names: Vec<String> = sim.network.nodes.iter().map(|n| n.name.clone()).collect();
    let models: Vec<&str> = sim.network.nodes.iter().map(|n| n.model.as_str()).collect();
    write_csv(&out.join(output::NETWORK_METRICS_FILE), |f| {
        output::write_network_metrics(f, &sim.collector.rows)
    })?;
    write_csv(&out.join(output::NODE_METRICS_FILE), |f| {
        output::write_node_metrics(f, &report, &names, &models)
    })?;
    write_csv(&out.join(output::SUMMARY_FILE), |f| output::write_summary(f, &report, &meta))?;

    Ok(RunOutcome {
        report,
        rows: std::mem::take(&mut sim.collector.rows),
        meta,
        warnings,
    })
}

fn write_csv(path: &Path, write: impl FnOnce(BufWriter<File>) -> csv::Result<()>) -> Result<(), RunError> {
    let file = File::create(path).map_err(io_err(path))?;
    write(BufWriter::new(file)).map_err(|source| RunError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    CatalogSize,
    Seed,
    CsCapacity,
    InterDownloadInterval,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::CatalogSize => "catalog_size",
            SweepParam::Seed => "seed",
            SweepParam::CsCapacity => "cs_capacity",
            SweepParam::InterDownloadInterval => "inter_download_interval",
        }
    }

    /// Applies `value` to `cfg`.
    pub fn apply(self, cfg: &mut ScenarioConfig, value: &str) -> Result<(), RunError> {
        fn num<T: FromStr>(param: SweepParam, v: &str) -> Result<T, RunError> {
            v.parse()
                .map_err(|_| RunError::Invalid(format!("bad value \"{v}\" for {}", param.as_str())))
        }
        match self {
            SweepParam::CatalogSize => {
                let size: u32 = num(self, value)?;
                if size == 0 {
                    return Err(RunError::Invalid("catalog_size must be at least 1".into()));
                }
                cfg.set_catalog_size(size);
            }
            SweepParam::Seed => cfg.simulation.seed = num(self, value)?,
            SweepParam::CsCapacity => cfg.set_cs_capacity(num(self, value)?),
            SweepParam::InterDownloadInterval => {
                let mean: f64 = num(self, value)?;
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(RunError::Invalid("inter_download_interval must be positive".into()));
                }
                cfg.set_inter_download_mean(mean);
            }
        }
        Ok(())
    }
}

impl FromStr for SweepParam {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParam::CatalogSize,
            SweepParam::Seed,
            SweepParam::CsCapacity,
            SweepParam::InterDownloadInterval,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| {
            RunError::Invalid(format!(
                "unknown sweep parameter \"{s}\" (expected catalog_size, seed, cs_capacity or inter_download_interval)"
            ))
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: String,
    pub seed: u64,
    pub dir: PathBuf,
    pub outcome: RunOutcome,
}

/// Runs every `(value, seed)` pair in parallel, each in its own
/// subdirectory of `out`, then writes the combined summary. Results come back
/// ordered by `(value, seed)`.
///
/// For the `seed` parameter the values are the seeds and `seeds` is unused.
pub fn sweep(
    cfg: &ScenarioConfig,
    param: SweepParam,
    values: &[String],
    seeds: &[u64],
    duration_s: Option<f64>,
    out: &Path,
) -> Result<Vec<SweepRun>, RunError> {
    if values.is_empty() {
        return Err(RunError::Invalid("sweep needs at least one value".into()));
    }
    let seeds: Vec<u64> = if param == SweepParam::Seed || seeds.is_empty() {
        vec![cfg.simulation.seed]
    } else {
        seeds.to_vec()
    };
    let mut jobs = Vec::new();
    for value in values {
        for &seed in &seeds {
            let mut c = cfg.clone();
            c.simulation.seed = seed;
            param.apply(&mut c, value)?;
            let seed = c.simulation.seed;
            jobs.push((value.clone(), seed, c));
        }
    }
    jobs.sort_by(|a, b| sort_key(&a.0).total_cmp(&sort_key(&b.0)).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    jobs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    fs::create_dir_all(out).map_err(io_err(out))?;
    let overrides = Overrides {
        duration_s,
        ..Overrides::default()
    };
    let runs = jobs
        .into_par_iter()
        .map(|(value, seed, c)| {
            let dir = out.join(format!("{}_{}_seed{}", param.as_str(), value, seed));
            let outcome = run(&c, &overrides, &dir)?;
            Ok(SweepRun {
                value,
                seed,
                dir,
                outcome,
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    let rows: Vec<(String, Vec<String>)> = runs
        .iter()
        .map(|r| (r.value.clone(), output::summary_record(&r.outcome.report, &r.outcome.meta)))
        .collect();
    let path = out.join(output::SWEEP_SUMMARY_FILE);
    write_csv(&path, |f| output::write_sweep_summary(f, param.as_str(), &rows))?;
    Ok(runs)
}

fn sort_key(value: &str) -> f64 {
    value.parse().unwrap_or(f64::INFINITY)
}
