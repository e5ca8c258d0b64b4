//! Model partitioning into a low-resolution part and a residual, and the
//! bit-level wire format that carries them on separate bit planes.
//!
//! Fixed-point low-resolution values are handled as integer step counts
//! `k` with value `k / 10^decimals`, so the server and every agent reproduce
//! the same values bit-exactly.

mod planes;
mod wire;

pub use planes::{pack_symbols, symbol_count, unpack_symbols, BitPlaneStreams, Framing, PlaneMode};
pub use wire::{
    bits_to_bytes, decode_hires, decode_lowres, encode_hires, encode_lowres, Bits, FrameHeader,
    FRAME_HEADER_BITS, HIRES_BITS,
};

use std::ops::Deref;

use crate::error::{Error, Result};

/// Flat model parameter vector with finite 64-bit components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelVector(Vec<f64>);

impl ModelVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "component {i} = {} is not finite",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Componentwise round trip through `f32`.
    pub fn narrowed_f32(&self) -> ModelVector {
        Self(self.0.iter().map(|&v| f64::from(v as f32)).collect())
    }

    pub(crate) fn check_len(&self, n: usize, what: &str) -> Result<()> {
        if self.len() != n {
            return Err(Error::domain(format!(
                "{what}: length {} does not match {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

impl Deref for ModelVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub const DEFAULT_LOWRES_INT_BITS: u8 = 16;

/// Decimal fixed-point grid with step `10^-decimals` and signed `int_bits`-wide
/// step counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    decimals: u8,
    int_bits: u8,
    scale: f64,
}

impl FixedPoint {
    pub fn new(decimals: u8, int_bits: u8) -> Result<Self> {
        if !(1..=7).contains(&decimals) {
            return Err(Error::domain(format!("decimals = {decimals} is outside [1, 7]")));
        }
        check_int_bits(int_bits)?;
        Ok(Self {
            decimals,
            int_bits,
            // exact: 10^7 < 2^53
            scale: 10f64.powi(i32::from(decimals)),
        })
    }

    pub fn decimals(&self) -> u8 {
        self.decimals
    }

    pub fn int_bits(&self) -> u8 {
        self.int_bits
    }

    /// `10^decimals`, the reciprocal of the step.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_steps(&self) -> i64 {
        (1i64 << (self.int_bits - 1)) - 1
    }

    /// Nearest step counts, ties to even.
    pub fn to_steps(&self, w: &[f64]) -> Result<Vec<i64>> {
        let max = self.max_steps() as f64;
        w.iter()
            .enumerate()
            .map(|(index, &value)| {
                let k = (value * self.scale).round_ties_even();
                if k.is_nan() || k.abs() > max {
                    return Err(Error::Range {
                        index,
                        value,
                        bits: self.int_bits,
                    });
                }
                Ok(k as i64)
            })
            .collect()
    }

    pub fn step_value(&self, k: i64) -> f64 {
        k as f64 / self.scale
    }

    pub fn from_steps(&self, k: &[i64]) -> ModelVector {
        ModelVector(k.iter().map(|&k| self.step_value(k)).collect())
    }

    /// Step counts of a vector already on the grid; anything else is an
    /// encoding error.
    pub fn steps_of_representable(&self, w1: &[f64]) -> Result<Vec<i64>> {
        let steps = self
            .to_steps(w1)
            .map_err(|e| Error::Encoding(e.to_string()))?;
        for (i, (&k, &v)) in steps.iter().zip(w1).enumerate() {
            if self.step_value(k).to_bits() != v.to_bits() && !(k == 0 && v == 0.0) {
                return Err(Error::Encoding(format!(
                    "component {i} = {v} is not on the 1e-{} grid",
                    self.decimals
                )));
            }
        }
        Ok(steps)
    }
}

fn check_int_bits(bits: u8) -> Result<()> {
    if !(8..=32).contains(&bits) {
        return Err(Error::domain(format!("lowres_int_bits = {bits} is outside [8, 32]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantizerVariant {
    /// Decimal fixed point with `decimals` fractional digits.
    FixedPoint { decimals: u8 },
    /// `w1 = sign(w)`, `w2 = w - alpha * w1`. `alpha = None` uses the mean
    /// absolute value of the quantized vector, recomputed on every call.
    SignScale { alpha: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub variant: QuantizerVariant,
    pub lowres_int_bits: u8,
}

impl QuantizerSpec {
    pub fn fixed_point(decimals: u8) -> Result<Self> {
        let spec = Self {
            variant: QuantizerVariant::FixedPoint { decimals },
            lowres_int_bits: DEFAULT_LOWRES_INT_BITS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sign_scale(alpha: Option<f64>) -> Result<Self> {
        let spec = Self {
            variant: QuantizerVariant::SignScale { alpha },
            lowres_int_bits: DEFAULT_LOWRES_INT_BITS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_lowres_int_bits(mut self, bits: u8) -> Result<Self> {
        self.lowres_int_bits = bits;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_int_bits(self.lowres_int_bits)?;
        match self.variant {
            QuantizerVariant::FixedPoint { decimals } => {
                FixedPoint::new(decimals, self.lowres_int_bits)?;
            }
            QuantizerVariant::SignScale { alpha: Some(a) } if !(a > 0.0 && a.is_finite()) => {
                return Err(Error::domain(format!("alpha = {a} must be positive")));
            }
            QuantizerVariant::SignScale { .. } => {}
        }
        Ok(())
    }

    pub fn fixed(&self) -> Option<FixedPoint> {
        match self.variant {
            QuantizerVariant::FixedPoint { decimals } => {
                FixedPoint::new(decimals, self.lowres_int_bits).ok()
            }
            QuantizerVariant::SignScale { .. } => None,
        }
    }

    /// Bits per component of the encoded low-resolution stream.
    pub fn lowres_bits_per_component(&self) -> usize {
        match self.variant {
            QuantizerVariant::FixedPoint { .. } => self.lowres_int_bits as usize,
            QuantizerVariant::SignScale { .. } => 1,
        }
    }
}

/// Fixed-point quantization of every component, ties to even.
pub fn quantize_fixed(w: &ModelVector, fp: &FixedPoint) -> Result<ModelVector> {
    Ok(fp.from_steps(&fp.to_steps(w)?))
}

/// `sign(x)` with `sign(0) = +1`.
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn mean_abs(w: &[f64]) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    w.iter().map(|v| v.abs()).sum::<f64>() / w.len() as f64
}

/// Low-resolution part `w1` and residual `w2` of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedModel {
    pub w1: ModelVector,
    pub w2: ModelVector,
    pub spec: QuantizerSpec,
    /// Scale applied to `w1` on reconstruction: 1 for fixed point, alpha for
    /// the sign variant.
    pub scale: f64,
}

impl PartitionedModel {
    pub fn reconstruct(&self) -> ModelVector {
        ModelVector(
            self.w1
                .iter()
                .zip(self.w2.iter())
                .map(|(a, b)| self.scale * a + b)
                .collect(),
        )
    }
}

pub fn partition(w: &ModelVector, spec: &QuantizerSpec) -> Result<PartitionedModel> {
    spec.validate()?;
    match spec.variant {
        QuantizerVariant::FixedPoint { decimals } => {
            let fp = FixedPoint::new(decimals, spec.lowres_int_bits)?;
            let w1 = quantize_fixed(w, &fp)?;
            let w2 = ModelVector(w.iter().zip(w1.iter()).map(|(a, b)| a - b).collect());
            Ok(PartitionedModel {
                w1,
                w2,
                spec: *spec,
                scale: 1.0,
            })
        }
        QuantizerVariant::SignScale { alpha } => {
            let alpha = alpha.unwrap_or_else(|| mean_abs(w));
            let w1 = ModelVector(w.iter().map(|&v| sign(v)).collect());
            let w2 = ModelVector(w.iter().zip(w1.iter()).map(|(v, s)| v - alpha * s).collect());
            Ok(PartitionedModel {
                w1,
                w2,
                spec: *spec,
                scale: alpha,
            })
        }
    }
}
