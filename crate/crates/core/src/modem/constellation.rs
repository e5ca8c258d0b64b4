use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Labels by point index.
///
/// Points are ordered counterclockwise: index `2q` sits at `pi/4 + q*pi/2 - theta`
/// and `2q + 1` at `pi/4 + q*pi/2 + theta`. Walking the circle gives a Gray
/// sequence, the first two bits Gray-code the quadrant (Q1 = 00, Q2 = 01,
/// Q3 = 11, Q4 = 10) and the third bit separates the two members of a pair.
pub const LABELS: [u8; 8] = [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100];

/// Shared first-two-bits word of each pair, by pair (quadrant) index.
pub const PAIR_WORDS: [u8; 4] = [0b00, 0b01, 0b11, 0b10];

/// Non-uniform 8-PSK constellation with pair half-angle `theta`.
///
/// `theta = pi/8` is uniform 8-PSK; `theta -> 0` collapses each pair onto
/// its quadrant diagonal (QPSK).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    theta: T,
    points: [Complex<T>; 8],
    // label -> point index
    index_of_label: [usize; 8],
}

impl<T: Real> Constellation<T> {
    pub fn new(theta: T) -> Result<Self> {
        let quarter = T::FRAC_PI_4();
        if !(theta > T::zero() && theta < quarter) {
            return Err(Error::domain(format!(
                "theta = {theta} is outside the open interval (0, pi/4)"
            )));
        }
        let points = std::array::from_fn(|k| {
            let quadrant = T::of((k / 2) as f64);
            let offset = if k % 2 == 0 { -theta } else { theta };
            Complex::from_polar(T::one(), quarter + quadrant * T::FRAC_PI_2() + offset)
        });
        let mut index_of_label = [0; 8];
        for (k, &label) in LABELS.iter().enumerate() {
            index_of_label[label as usize] = k;
        }
        Ok(Self {
            theta,
            points,
            index_of_label,
        })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn points(&self) -> &[Complex<T>; 8] {
        &self.points
    }

    pub fn labels(&self) -> &[u8; 8] {
        &LABELS
    }

    /// Point carrying `label`. `label` must be below 8.
    pub fn point_for_label(&self, label: u8) -> Complex<T> {
        self.points[self.index_of_label[label as usize]]
    }

    /// Mean of the two points of each pair, by pair index.
    pub fn pair_centroids(&self) -> [Complex<T>; 4] {
        let half = T::of(0.5);
        std::array::from_fn(|q| (self.points[2 * q] + self.points[2 * q + 1]) * half)
    }
}
