use num_complex::Complex;

use super::constellation::{Constellation, PAIR_WORDS};
use crate::scalar::Real;

// Every candidate set here has equal-magnitude members, so the nearest one
// is the one with the largest correlation Re(r * conj(c)). Unlike squared
// distances this ties exactly at the origin; strict `>` keeps the lowest
// index on ties.
fn argmin_distance<T: Real>(r: Complex<T>, candidates: &[Complex<T>]) -> usize {
    let corr = |c: &Complex<T>| r.re * c.re + r.im * c.im;
    let mut best = 0;
    let mut best_c = corr(&candidates[0]);
    for (k, c) in candidates.iter().enumerate().skip(1) {
        let v = corr(c);
        if v > best_c {
            best = k;
            best_c = v;
        }
    }
    best
}

/// Index of the constellation point nearest to `r`.
pub fn nearest_point<T: Real>(r: Complex<T>, c: &Constellation<T>) -> usize {
    argmin_distance(r, c.points())
}

/// Index of the pair whose centroid is nearest to `r`.
pub fn nearest_pair<T: Real>(r: Complex<T>, centroids: &[Complex<T>; 4]) -> usize {
    argmin_distance(r, centroids)
}

/// Minimum-distance (ML under AWGN) detection of all three bits.
pub fn demod_full<T: Real>(received: &[Complex<T>], c: &Constellation<T>) -> Vec<u8> {
    received
        .iter()
        .map(|&r| c.labels()[nearest_point(r, c)])
        .collect()
}

/// Detection of the first two bits only, by nearest pair centroid.
pub fn demod_coarse<T: Real>(received: &[Complex<T>], c: &Constellation<T>) -> Vec<u8> {
    let centroids = c.pair_centroids();
    received
        .iter()
        .map(|&r| PAIR_WORDS[nearest_pair(r, &centroids)])
        .collect()
}
