//! Experiment configuration, multi-seed orchestration and CSV output.

mod bench;
mod config;
mod experiment;

pub use bench::{modem_bench, write_bench_csv, BenchConfig, BENCH_CSV_HEADER};
pub use config::{parse_seeds, ExperimentConfig, Mode};
pub use experiment::{run, run_jobs, write_metrics_csv, ExperimentResults, ScenarioSummary};
