use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ccnsim::runner::{self, Overrides, SweepParam};
use ccnsim::scenario::{parse_scenario, ScenarioConfig};
use ccnsim::topology::build_network;

#[derive(Parser)]
#[command(name = "ccnsim", version, about = "Discrete-event CCN simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated seconds.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write every sent and received packet to this file.
        #[arg(long)]
        packet_dump: Option<PathBuf>,
    },
    /// Run a scenario once per (value, seed) pair.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// catalog_size, seed, cs_capacity or inter_download_interval.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Parse and build a scenario without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, String> {
    parse_scenario(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            config,
            seed,
            duration,
            out,
            packet_dump,
        } => {
            let cfg = load(&config)?;
            let overrides = Overrides {
                seed,
                duration_s: duration,
                packet_dump,
            };
            let outcome = runner::run(&cfg, &overrides, &out).map_err(|e| e.to_string())?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let hit = outcome.report.hit_ratio.map(|h| h.to_string()).unwrap_or_else(|| "-".into());
            println!(
                "{}: seed {} hit ratio {hit}, {} downloads completed, {} events",
                out.display(),
                outcome.meta.seed,
                outcome.report.totals.downloads_completed,
                outcome.meta.events_processed
            );
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            duration,
            out,
        } => {
            let cfg = load(&config)?;
            let param: SweepParam = param.parse().map_err(|e: runner::RunError| e.to_string())?;
            let runs = runner::sweep(&cfg, param, &values, &seeds, duration, &out).map_err(|e| e.to_string())?;
            for r in &runs {
                let hit = r.outcome.report.hit_ratio.map(|h| h.to_string()).unwrap_or_else(|| "-".into());
                println!("{}={} seed={} hit_ratio={hit}", param.as_str(), r.value, r.seed);
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let net = build_network(&cfg).map_err(|e| format!("{}: {e}", config.display()))?;
            for w in &net.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: ok ({} nodes, {} links, hash {})",
                config.display(),
                net.nodes.len(),
                net.links.len(),
                cfg.config_hash()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
