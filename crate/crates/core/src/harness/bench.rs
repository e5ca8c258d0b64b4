use std::io::Write;

use crate::error::{Error, Result};
use crate::modem::{estimate_error_rates, BitPlaneErrorReport};

pub const BENCH_CSV_HEADER: &str = "theta,snr_db,n_symbols,ber_plane12,ber_plane3,ser_full,ci_halfwidth";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub thetas: Vec<f64>,
    pub snrs_db: Vec<f64>,
    pub n_symbols: usize,
    pub seed: u64,
}

/// Error-rate estimates over the `(theta, snr)` grid, theta-major.
pub fn modem_bench(cfg: &BenchConfig) -> Result<Vec<BitPlaneErrorReport>> {
    if cfg.thetas.is_empty() || cfg.snrs_db.is_empty() {
        return Err(Error::Config("modem-bench needs at least one theta and one SNR".into()));
    }
    let mut out = Vec::with_capacity(cfg.thetas.len() * cfg.snrs_db.len());
    for &theta in &cfg.thetas {
        for &snr in &cfg.snrs_db {
            out.push(estimate_error_rates(theta, snr, cfg.n_symbols, cfg.seed)?);
        }
    }
    Ok(out)
}

pub fn write_bench_csv<W: Write>(w: &mut W, rows: &[BitPlaneErrorReport]) -> Result<()> {
    writeln!(w, "{BENCH_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.theta, r.snr_db, r.n_symbols, r.ber_plane12, r.ber_plane3, r.ser_full, r.confidence_halfwidth
        )?;
    }
    Ok(())
}
