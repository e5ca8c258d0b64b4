use rand::Rng;
use rayon::prelude::*;

use super::channel::{add_noise, ChannelSpec};
use super::constellation::{Constellation, LABELS, PAIR_WORDS};
use super::demod::{nearest_pair, nearest_point};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

pub const MIN_SYMBOLS: usize = 10_000;

const SHARD: usize = 1 << 16;
const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo per-bit-plane error rates.
///
/// `ber_plane12` is the per-bit error rate of planes 1-2 as seen by a coarse
/// (pair-centroid) receiver; `ber_plane3` and `ser_full` come from the full
/// minimum-distance receiver. Half-widths are 95% normal approximations;
/// `confidence_halfwidth` is the largest of the three.
#[derive(Debug, Clone, PartialEq)]
pub struct BitPlaneErrorReport {
    pub theta: f64,
    pub snr_db: f64,
    pub n_symbols: usize,
    pub ber_plane12: f64,
    pub ber_plane3: f64,
    pub ser_full: f64,
    pub ci_plane12: f64,
    pub ci_plane3: f64,
    pub ci_ser: f64,
    pub confidence_halfwidth: f64,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    plane12_bit_errors: u64,
    plane3_errors: u64,
    symbol_errors: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            plane12_bit_errors: self.plane12_bit_errors + o.plane12_bit_errors,
            plane3_errors: self.plane3_errors + o.plane3_errors,
            symbol_errors: self.symbol_errors + o.symbol_errors,
        }
    }
}

fn halfwidth(p: f64, trials: usize) -> f64 {
    Z95 * (p * (1.0 - p) / trials as f64).sqrt()
}

fn run_shard<T: Real>(
    c: &Constellation<T>,
    ch: &ChannelSpec,
    shard: usize,
    len: usize,
) -> Counts {
    let mut rng = rng::stream(ch.seed, &[rng::DOMAIN_MONTE_CARLO, shard as u64]);
    let sent: Vec<usize> = (0..len).map(|_| rng.random_range(0..8)).collect();
    let mut rx: Vec<_> = sent.iter().map(|&k| c.points()[k]).collect();
    add_noise(&mut rx, ch.sigma(), &mut rng);

    let centroids = c.pair_centroids();
    let mut counts = Counts::default();
    for (&k, &r) in sent.iter().zip(&rx) {
        let tx_label = LABELS[k];
        let full = nearest_point(r, c);
        if full != k {
            counts.symbol_errors += 1;
        }
        counts.plane3_errors += u64::from((LABELS[full] ^ tx_label) & 1);
        let coarse = PAIR_WORDS[nearest_pair(r, &centroids)];
        counts.plane12_bit_errors += u64::from((coarse ^ (tx_label >> 1)).count_ones());
    }
    counts
}

/// Estimates the error rates of the constellation `theta` at `snr_db`.
///
/// Symbols are split into fixed shards, each with its own stream derived from
/// `(seed, shard index)`, so the result is independent of the thread count.
pub fn estimate_error_rates<T: Real>(
    theta: T,
    snr_db: f64,
    n_symbols: usize,
    seed: u64,
) -> Result<BitPlaneErrorReport> {
    if n_symbols < MIN_SYMBOLS {
        return Err(Error::domain(format!(
            "n_symbols = {n_symbols} is below the minimum of {MIN_SYMBOLS}"
        )));
    }
    let c = Constellation::new(theta)?;
    let ch = ChannelSpec::new(snr_db, seed)?;
    let shards = n_symbols.div_ceil(SHARD);
    let counts = (0..shards)
        .into_par_iter()
        .map(|s| run_shard(&c, &ch, s, SHARD.min(n_symbols - s * SHARD)))
        .reduce(Counts::default, |a, b| a + b);

    let n = n_symbols as f64;
    let ber_plane12 = counts.plane12_bit_errors as f64 / (2.0 * n);
    let ber_plane3 = counts.plane3_errors as f64 / n;
    let ser_full = counts.symbol_errors as f64 / n;
    let ci_plane12 = halfwidth(ber_plane12, 2 * n_symbols);
    let ci_plane3 = halfwidth(ber_plane3, n_symbols);
    let ci_ser = halfwidth(ser_full, n_symbols);
    Ok(BitPlaneErrorReport {
        theta: theta.to_f64_lossy(),
        snr_db,
        n_symbols,
        ber_plane12,
        ber_plane3,
        ser_full,
        ci_plane12,
        ci_plane3,
        ci_ser,
        confidence_halfwidth: ci_plane12.max(ci_plane3).max(ci_ser),
    })
}
