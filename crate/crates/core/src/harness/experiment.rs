use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::broadcast::RoundTrace;
use crate::dataio::{load_mnist, partition_agents, pooled_test_set, Dataset};
use crate::error::{Error, Result};
use crate::flcore::{run_fl, RoundMetrics, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    pub n_seeds: usize,
    pub mean_final_accuracy: f64,
    pub min_final_accuracy: f64,
    pub max_final_accuracy: f64,
}

/// Results of all `(scenario, seed)` runs, in canonical order.
#[derive(Debug, Clone, Default)]
pub struct ExperimentResults {
    pub metrics: Vec<RoundMetrics>,
    /// `(scenario, seed, trace)` when tracing was requested.
    pub traces: Vec<(Scenario, u64, Vec<RoundTrace>)>,
}

impl ExperimentResults {
    fn runs(&self, scenario: Scenario) -> impl Iterator<Item = &RoundMetrics> {
        self.metrics.iter().filter(move |m| m.scenario == scenario)
    }

    pub fn final_accuracies(&self, scenario: Scenario) -> Vec<f64> {
        let last = self.runs(scenario).map(|m| m.round_index).max().unwrap_or(0);
        self.runs(scenario)
            .filter(|m| m.round_index == last)
            .map(|m| m.test_accuracy)
            .collect()
    }

    /// Seed-mean accuracy per round; index 0 is round 1.
    pub fn mean_accuracy_by_round(&self, scenario: Scenario) -> Vec<f64> {
        let rounds = self.runs(scenario).map(|m| m.round_index).max().unwrap_or(0);
        let mut sum = vec![0.0; rounds];
        let mut count = vec![0usize; rounds];
        for m in self.runs(scenario) {
            sum[m.round_index - 1] += m.test_accuracy;
            count[m.round_index - 1] += 1;
        }
        sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
    }

    pub fn summary(&self) -> Vec<ScenarioSummary> {
        let mut scenarios: Vec<Scenario> = self.metrics.iter().map(|m| m.scenario).collect();
        scenarios.dedup();
        scenarios
            .into_iter()
            .map(|scenario| {
                let f = self.final_accuracies(scenario);
                ScenarioSummary {
                    scenario,
                    n_seeds: f.len(),
                    mean_final_accuracy: f.iter().sum::<f64>() / f.len() as f64,
                    min_final_accuracy: f.iter().copied().fold(f64::INFINITY, f64::min),
                    max_final_accuracy: f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect()
    }
}

/// Runs every `(scenario, seed)` pair on already-loaded data.
///
/// Runs execute on a pool of `cfg.workers` threads; results are collected in
/// `(scenario, seed)` order so the thread count never changes the output.
pub fn run_jobs(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<ExperimentResults> {
    cfg.validate()?;
    let quant = cfg.quantizer()?;
    let transport = cfg.transport();
    let jobs: Vec<(Scenario, u64)> = cfg
        .scenarios
        .iter()
        .flat_map(|&s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let outputs = pool.install(|| {
        jobs.par_iter()
            .map(|&(scenario, seed)| {
                let parts = partition_agents(train, test, cfg.n_agents, cfg.per_agent, seed)?;
                let pooled = pooled_test_set(&parts)?;
                let out = run_fl(
                    scenario,
                    &cfg.train_config(seed),
                    &quant,
                    &transport,
                    &parts,
                    &pooled,
                    cfg.trace.is_some(),
                )
                .map_err(|e| Error::Run { scenario: scenario.to_string(), seed, source: Box::new(e) })?;
                Ok((scenario, seed, out))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut results = ExperimentResults::default();
    for (scenario, seed, out) in outputs {
        results.metrics.extend(out.metrics);
        if cfg.trace.is_some() {
            results.traces.push((scenario, seed, out.traces));
        }
    }
    Ok(results)
}

/// Writes the metrics CSV: `#` config echo, header, one row per round, then
/// `#` summary lines.
pub fn write_metrics_csv<W: Write>(w: &mut W, cfg: &ExperimentConfig, results: &ExperimentResults) -> Result<()> {
    writeln!(w, "# multires-fl run-experiment")?;
    for line in cfg.to_kv_lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{}", RoundMetrics::CSV_HEADER)?;
    for m in &results.metrics {
        writeln!(w, "{}", m.csv_row())?;
    }
    writeln!(w, "# summary: scenario,n_seeds,mean_final_accuracy,min_final_accuracy,max_final_accuracy")?;
    for s in results.summary() {
        writeln!(
            w,
            "# summary: {},{},{},{},{}",
            s.scenario, s.n_seeds, s.mean_final_accuracy, s.min_final_accuracy, s.max_final_accuracy
        )?;
    }
    Ok(())
}

fn write_traces<W: Write>(w: &mut W, results: &ExperimentResults) -> Result<()> {
    writeln!(w, "scenario,seed,{}", RoundTrace::csv_header())?;
    for (scenario, seed, traces) in &results.traces {
        for t in traces {
            writeln!(w, "{scenario},{seed},{}", t.to_csv_row())?;
        }
    }
    Ok(())
}

// Writes through a sibling temporary file so a failed run leaves nothing behind.
fn write_atomically(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("partial");
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(std::fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Loads MNIST, runs the experiment and writes the CSV (and trace, if set).
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let (train, test) = load_mnist(&cfg.data_dir)?;
    let results = run_jobs(cfg, &train, &test)?;
    write_atomically(&cfg.out, |w| write_metrics_csv(w, cfg, &results))?;
    if let Some(path) = &cfg.trace {
        write_atomically(path, |w| write_traces(w, &results))?;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Mode;
    use ndarray::Array2;

    fn synthetic(n: usize, offset: usize) -> Dataset {
        let images = Array2::from_shape_fn((n, 784), |(r, c)| {
            let label = (r + offset) % 10;
            if c / 78 == label { 0.9 } else { ((r * 31 + c * 17) % 7) as f64 / 30.0 }
        });
        Dataset::new(images, (0..n).map(|i| ((i + offset) % 10) as u8).collect()).unwrap()
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            seeds: vec![1, 2],
            rounds: 3,
            per_agent: 40,
            workers: 2,
            ..Default::default()
        }
    }

    #[test]
    fn rows_are_canonical_and_worker_independent() {
        let (train, test) = (synthetic(200, 0), synthetic(200, 3));
        let cfg = small_config();
        let a = run_jobs(&cfg, &train, &test).unwrap();
        assert_eq!(a.metrics.len(), 3 * 2 * 3);
        let order: Vec<(Scenario, u64, usize)> =
            a.metrics.iter().map(|m| (m.scenario, m.seed, m.round_index)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);

        let b = run_jobs(&ExperimentConfig { workers: 1, ..cfg.clone() }, &train, &test).unwrap();
        let mut wa = Vec::new();
        let mut wb = Vec::new();
        write_metrics_csv(&mut wa, &cfg, &a).unwrap();
        write_metrics_csv(&mut wb, &cfg, &b).unwrap();
        assert_eq!(wa, wb);
        let text = String::from_utf8(wa).unwrap();
        assert!(text.contains("# mode = ideal"));
        assert!(text.contains("# summary: high,2,"));
    }

    #[test]
    fn noiseless_physical_matches_ideal() {
        let (train, test) = (synthetic(200, 0), synthetic(200, 3));
        let ideal = small_config();
        let phys = ExperimentConfig {
            mode: Mode::Physical,
            snr_high_db: Some(f64::INFINITY),
            snr_low_db: Some(f64::INFINITY),
            ..small_config()
        };
        let a = run_jobs(&ideal, &train, &test).unwrap();
        let b = run_jobs(&phys, &train, &test).unwrap();
        let rows = |r: &ExperimentResults| r.metrics.iter().map(RoundMetrics::csv_row).collect::<Vec<_>>();
        assert_eq!(rows(&a), rows(&b));
    }

    #[test]
    fn failed_run_leaves_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            data_dir: dir.path().join("missing"),
            out: dir.path().join("out.csv"),
            ..small_config()
        };
        assert!(run(&cfg).is_err());
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());

        let out = dir.path().join("x.csv");
        let r = write_atomically(&out, |_| Err(Error::Config("boom".into())));
        assert!(r.is_err());
        assert!(!out.exists());
        assert!(!out.with_extension("partial").exists());
    }

    #[test]
    fn traces_are_collected() {
        let (train, test) = (synthetic(200, 0), synthetic(200, 3));
        let cfg = ExperimentConfig {
            scenarios: vec![Scenario::Mixed],
            seeds: vec![5],
            trace: Some("unused".into()),
            ..small_config()
        };
        let r = run_jobs(&cfg, &train, &test).unwrap();
        assert_eq!(r.traces.len(), 1);
        let t = &r.traces[0].2;
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].agent_checksums.len(), 4);
        // high-SNR agents share a model, as do low-SNR agents
        assert_eq!(t[1].agent_checksums[0], t[1].agent_checksums[1]);
        assert_eq!(t[1].agent_checksums[2], t[1].agent_checksums[3]);
        assert_ne!(t[1].agent_checksums[0], t[1].agent_checksums[2]);
    }
}
