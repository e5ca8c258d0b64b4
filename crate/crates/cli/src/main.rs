use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use multires_fl::harness::{self, parse_seeds, BenchConfig, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mrfl", version, about = "Multi-resolution model broadcast for federated learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the federated experiment over scenarios and seeds.
    RunExperiment {
        /// Flat `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated scenarios (high, mixed, low).
        #[arg(long)]
        scenario: Option<String>,
        /// Seeds, e.g. `0-9` or `1,4,7`.
        #[arg(long)]
        seeds: Option<String>,
        /// `ideal` or `physical`.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Also write per-round checksums here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Extra `key=value` overrides.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Monte Carlo bit-plane error rates over a (theta, SNR) grid.
    ModemBench {
        /// Comma-separated angles in radians.
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        /// Comma-separated Es/N0 values in dB.
        #[arg(long = "snr-db", value_delimiter = ',', required = true, allow_hyphen_values = true)]
        snr_db: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        symbols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::RunExperiment { config, scenario, seeds, mode, out, workers, data_dir, trace, set } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::from_file(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = scenario {
                cfg.set("scenarios", &s)?;
            }
            if let Some(s) = seeds {
                cfg.seeds = parse_seeds(&s)?;
            }
            if let Some(m) = mode {
                cfg.set("mode", &m)?;
            }
            for kv in &set {
                let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got '{kv}'"))?;
                cfg.set(k.trim(), v.trim())?;
            }
            cfg.out = out.unwrap_or(cfg.out);
            cfg.workers = workers.unwrap_or(cfg.workers);
            cfg.data_dir = data_dir.unwrap_or(cfg.data_dir);
            cfg.trace = trace.or(cfg.trace);
            let results = harness::run(&cfg)?;
            for s in results.summary() {
                eprintln!(
                    "{}: {} seeds, final accuracy mean {:.4} (min {:.4}, max {:.4})",
                    s.scenario, s.n_seeds, s.mean_final_accuracy, s.min_final_accuracy, s.max_final_accuracy
                );
            }
            eprintln!("wrote {}", cfg.out.display());
        }
        Command::ModemBench { theta, snr_db, symbols, seed, out } => {
            let rows = harness::modem_bench(&BenchConfig { thetas: theta, snrs_db: snr_db, n_symbols: symbols, seed })?;
            match out {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(&p).with_context(|| p.display().to_string())?);
                    harness::write_bench_csv(&mut w, &rows)?;
                    w.flush()?;
                }
                None => harness::write_bench_csv(&mut std::io::stdout().lock(), &rows)?,
            }
        }
    }
    Ok(())
}
