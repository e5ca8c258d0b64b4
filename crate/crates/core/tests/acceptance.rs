//! Acceptance suite: one PASS/FAIL line per criterion; non-zero exit on failure.
//!
//! MNIST is read from `MNIST_DIR` or `data/mnist` at the workspace root.

mod common;

use std::collections::HashSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use multires_fl::dataio::{load_mnist, partition_agents, Dataset, IMAGE_PIXELS};
use multires_fl::flcore::{RoundMetrics, Scenario, PARAM_COUNT};
use multires_fl::harness::{run_jobs, ExperimentConfig, ExperimentResults, Mode};
use multires_fl::modem::estimate_error_rates;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    eprintln!("  criterion {id} done");
    Outcome { id, name, pass, detail }
}

fn modem_union_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for snr in [6.0, 10.0, 14.0] {
        let r = estimate_error_rates(PI / 8.0, snr, 1_000_000, 0).unwrap();
        let ub = common::union_bound(PI / 8.0, snr, true);
        let ok = (r.ser_full - ub.ser).abs() <= r.ci_ser;
        pass &= ok;
        parts.push(format!("{snr}dB mc={:.5} ub={:.5} ci={:.5}", r.ser_full, ub.ser, r.ci_ser));
    }
    outcome(3, "uniform 8-PSK SER vs pairwise union bound", pass, parts.join("; "))
}

fn bit_plane_tradeoff() -> Outcome {
    let mut pass = true;
    let mut worst_gap = f64::INFINITY;
    for theta in [PI / 32.0, PI / 16.0] {
        for snr in [4.0, 8.0, 12.0, 16.0] {
            let r = estimate_error_rates(theta, snr, 1_000_000, 0).unwrap();
            let gap = (r.ber_plane3 - r.ci_plane3) - (r.ber_plane12 + r.ci_plane12);
            worst_gap = worst_gap.min(gap);
            pass &= gap > 0.0;
        }
    }
    outcome(4, "plane-3 BER above planes-1-2 BER", pass, format!("smallest separation {worst_gap:.3e}"))
}

fn codec_conformance() -> Outcome {
    let r = common::random_walk_conformance(60, PARAM_COUNT, 2, 0);
    let pass = r.exact_rounds == r.rounds && r.worst_error_ratio <= 1.0;
    outcome(
        5,
        "codec conformance over a 60-round random walk",
        pass,
        format!(
            "{}/{} rounds bit-exact; worst error = {:.3} x 2^-24 max|w2|{}",
            r.exact_rounds,
            r.rounds,
            r.worst_error_ratio,
            r.first_failure.map(|f| format!(" ({f})")).unwrap_or_default()
        ),
    )
}

fn gradient_oracle() -> Outcome {
    let worst = common::gradient_check(5, 100, 1e-5, 0);
    outcome(7, "backprop vs central differences", worst <= 1e-4, format!("worst relative error {worst:.3e}"))
}

fn data_integrity(train: &Dataset, test: &Dataset) -> Outcome {
    let shapes = train.images().dim() == (60_000, IMAGE_PIXELS)
        && test.images().dim() == (10_000, IMAGE_PIXELS)
        && train.labels().len() == 60_000
        && test.labels().len() == 10_000;
    let mut partitions_ok = true;
    for seed in 0..10 {
        let parts = partition_agents(train, test, 4, 2_500, seed).unwrap();
        let mut seen = (HashSet::new(), HashSet::new());
        for p in &parts {
            partitions_ok &= p.train.len() == 2_500 && p.test.len() == 2_500;
            partitions_ok &= p.train_indices.iter().all(|&i| seen.0.insert(i));
            partitions_ok &= p.test_indices.iter().all(|&i| seen.1.insert(i));
        }
    }
    outcome(
        8,
        "MNIST shapes and disjoint 2,500-sample partitions",
        shapes && partitions_ok,
        format!("train {:?}, test {:?}, partitions ok: {partitions_ok}", train.images().dim(), test.images().dim()),
    )
}

fn accuracy_bands(results: &ExperimentResults, elapsed: Duration) -> Outcome {
    let mean = |s| {
        let f = results.final_accuracies(s);
        f.iter().sum::<f64>() / f.len() as f64
    };
    let (high, mixed, low) = (mean(Scenario::High), mean(Scenario::Mixed), mean(Scenario::Low));
    let pass = (high - 0.92).abs() <= 0.015
        && (low - 0.90).abs() <= 0.015
        && low < mixed
        && mixed < high
        && elapsed < Duration::from_secs(15 * 60);
    outcome(
        1,
        "final accuracy bands over 10 seeds",
        pass,
        format!("high {high:.4}, mixed {mixed:.4}, low {low:.4}; 30 runs in {:.0}s", elapsed.as_secs_f64()),
    )
}

fn late_round_ordering(results: &ExperimentResults) -> Outcome {
    let h = results.mean_accuracy_by_round(Scenario::High);
    let m = results.mean_accuracy_by_round(Scenario::Mixed);
    let l = results.mean_accuracy_by_round(Scenario::Low);
    let bad: Vec<usize> = (40..=h.len()).filter(|&r| !(h[r - 1] >= m[r - 1] && m[r - 1] >= l[r - 1])).collect();
    outcome(
        2,
        "high >= mixed >= low at every round >= 40",
        bad.is_empty() && h.len() >= 40,
        if bad.is_empty() { format!("rounds 40..={} ordered", h.len()) } else { format!("violations at rounds {bad:?}") },
    )
}

fn mode_equivalence(ideal: &ExperimentResults, train: &Dataset, test: &Dataset) -> Outcome {
    let cfg = ExperimentConfig {
        seeds: vec![0],
        mode: Mode::Physical,
        snr_high_db: Some(f64::INFINITY),
        snr_low_db: Some(f64::INFINITY),
        ..Default::default()
    };
    let physical = run_jobs(&cfg, train, test).unwrap();
    let rows = |ms: &[RoundMetrics]| ms.iter().filter(|m| m.seed == 0).map(RoundMetrics::csv_row).collect::<Vec<_>>();
    let (a, b) = (rows(&ideal.metrics), rows(&physical.metrics));
    let pass = !a.is_empty() && a == b;
    outcome(
        6,
        "noiseless physical mode equals ideal mode",
        pass,
        format!("{} ideal rows, {} physical rows, identical: {}", a.len(), b.len(), a == b),
    )
}

fn main() -> ExitCode {
    let mut outcomes = vec![modem_union_bound(), bit_plane_tradeoff(), codec_conformance(), gradient_oracle()];

    let dir = common::mnist_dir();
    match load_mnist(&dir) {
        Ok((train, test)) => {
            outcomes.push(data_integrity(&train, &test));
            eprintln!("  running 30 federated runs (3 scenarios x 10 seeds, 60 rounds)");
            let start = Instant::now();
            let results = run_jobs(&ExperimentConfig::default(), &train, &test).unwrap();
            let elapsed = start.elapsed();
            outcomes.push(accuracy_bands(&results, elapsed));
            outcomes.push(late_round_ordering(&results));
            outcomes.push(mode_equivalence(&results, &train, &test));
        }
        Err(e) => {
            for (id, name) in [(1, "final accuracy bands"), (2, "late-round ordering"), (6, "mode equivalence"), (8, "MNIST data")] {
                outcomes.push(Outcome { id, name, pass: false, detail: format!("MNIST unavailable in {}: {e}", dir.display()) });
            }
        }
    }

    outcomes.sort_by_key(|o| o.id);
    let mut failed = 0;
    for o in &outcomes {
        println!("[{}] criterion {}: {} -- {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
