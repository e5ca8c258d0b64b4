//! Non-uniform 8-PSK modem over AWGN.
//!
//! Convention: unit symbol energy, `snr_db` is Es/N0, and the noise variance
//! per real dimension is `10^(-snr_db/10) / 2`. Bit plane 1 is the most
//! significant bit of a 3-bit label, plane 3 the least significant.

mod channel;
mod constellation;
mod demod;
mod estimate;

pub use channel::{awgn, add_noise, ChannelSpec};
pub use constellation::{Constellation, LABELS, PAIR_WORDS};
pub use demod::{demod_coarse, demod_full, nearest_pair, nearest_point};
pub use estimate::{estimate_error_rates, BitPlaneErrorReport, MIN_SYMBOLS};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Maps 3-bit words onto constellation points.
pub fn modulate<T: Real>(words: &[u8], c: &Constellation<T>) -> Result<Vec<Complex<T>>> {
    words
        .iter()
        .map(|&w| {
            if w > 7 {
                Err(Error::domain(format!("symbol word {w} is not a 3-bit value")))
            } else {
                Ok(c.point_for_label(w))
            }
        })
        .collect()
}
