use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::scalar::Real;

/// AWGN channel parameters. `snr_db = +inf` selects the noiseless channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(snr_db: f64, seed: u64) -> Result<Self> {
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::domain(format!("snr_db = {snr_db} is not a usable Es/N0")));
        }
        Ok(Self { snr_db, seed })
    }

    pub fn noiseless(seed: u64) -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    /// Noise standard deviation per real dimension, `sqrt(N0 / 2)` with `Es = 1`.
    pub fn sigma(&self) -> f64 {
        if self.is_noiseless() {
            0.0
        } else {
            (10f64.powf(-self.snr_db / 10.0) / 2.0).sqrt()
        }
    }

    /// The same channel with its seed re-derived for a sub-stream (e.g. a round).
    pub fn substream(&self, ids: &[u64]) -> Self {
        Self {
            snr_db: self.snr_db,
            seed: rng::derive_seed(self.seed, ids),
        }
    }
}

/// Adds circularly-symmetric complex Gaussian noise, real part drawn first.
pub fn add_noise<T: Real>(symbols: &mut [Complex<T>], sigma: f64, rng: &mut StreamRng) {
    if sigma == 0.0 {
        return;
    }
    for s in symbols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex::new(T::of(sigma * re), T::of(sigma * im));
    }
}

/// Passes `symbols` through the channel; bit-identical for a fixed seed.
pub fn awgn<T: Real>(symbols: &[Complex<T>], ch: &ChannelSpec) -> Vec<Complex<T>> {
    let mut out = symbols.to_vec();
    let mut rng = rng::stream(ch.seed, &[rng::DOMAIN_CHANNEL]);
    add_noise(&mut out, ch.sigma(), &mut rng);
    out
}
