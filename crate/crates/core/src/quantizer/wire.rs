//! Bit-level encoding of the two model parts.
//!
//! All fields are most significant bit first, components in index order.
//! See `docs/wire-format.md` for the layout.

use super::{FixedPoint, ModelVector, QuantizerSpec, QuantizerVariant};
use crate::error::{Error, Result};

pub type Bits = Vec<bool>;

pub const HIRES_BITS: usize = 32;
pub const FRAME_HEADER_BITS: usize = 32 + 8 + 32 + 8;

const TAG_FIXED_POINT: u8 = 0;
const TAG_SIGN_SCALE: u8 = 1;

fn push_msb_first(bits: &mut Bits, value: u64, width: usize) {
    bits.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
}

fn read_msb_first(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
}

/// Packs bits into bytes, MSB first; the last byte is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            let v = read_msb_first(c) as u8;
            v << (8 - c.len())
        })
        .collect()
}

/// Per-frame header: component count, quantizer variant and its parameter,
/// and the low-resolution integer width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameHeader {
    pub n: u32,
    pub variant_tag: u8,
    /// Decimal count (fixed point) or the `f32` bit pattern of alpha (sign).
    pub param: u32,
    pub lowres_int_bits: u8,
}

impl FrameHeader {
    /// Header for a frame of `n` components. `alpha` is the scale actually
    /// used for the sign variant and is ignored for fixed point.
    pub fn new(spec: &QuantizerSpec, n: usize, alpha: f32) -> Result<Self> {
        let n = u32::try_from(n).map_err(|_| Error::framing(format!("{n} components do not fit a frame")))?;
        let (variant_tag, param) = match spec.variant {
            QuantizerVariant::FixedPoint { decimals } => (TAG_FIXED_POINT, u32::from(decimals)),
            QuantizerVariant::SignScale { .. } => (TAG_SIGN_SCALE, alpha.to_bits()),
        };
        Ok(Self {
            n,
            variant_tag,
            param,
            lowres_int_bits: spec.lowres_int_bits,
        })
    }

    pub fn alpha(&self) -> Option<f32> {
        (self.variant_tag == TAG_SIGN_SCALE).then(|| f32::from_bits(self.param))
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Quantizer spec described by the header. For the sign variant the
    /// transmitted alpha is echoed as a fixed alpha.
    pub fn spec(&self) -> Result<QuantizerSpec> {
        let variant = match self.variant_tag {
            TAG_FIXED_POINT => QuantizerVariant::FixedPoint {
                decimals: u8::try_from(self.param)
                    .map_err(|_| Error::framing("decimal count out of range"))?,
            },
            TAG_SIGN_SCALE => QuantizerVariant::SignScale {
                alpha: Some(f64::from(f32::from_bits(self.param))),
            },
            t => return Err(Error::framing(format!("unknown variant tag {t}"))),
        };
        let spec = QuantizerSpec {
            variant,
            lowres_int_bits: self.lowres_int_bits,
        };
        if let QuantizerVariant::FixedPoint { .. } = variant {
            spec.validate().map_err(|e| Error::framing(e.to_string()))?;
        }
        Ok(spec)
    }

    pub fn encode(&self) -> Bits {
        let mut bits = Vec::with_capacity(FRAME_HEADER_BITS);
        push_msb_first(&mut bits, u64::from(self.n), 32);
        push_msb_first(&mut bits, u64::from(self.variant_tag), 8);
        push_msb_first(&mut bits, u64::from(self.param), 32);
        push_msb_first(&mut bits, u64::from(self.lowres_int_bits), 8);
        bits
    }

    /// Parses a header from the front of `bits`, returning the remainder.
    pub fn decode(bits: &[bool]) -> Result<(Self, &[bool])> {
        if bits.len() < FRAME_HEADER_BITS {
            return Err(Error::framing(format!(
                "{} bits cannot hold an {FRAME_HEADER_BITS}-bit header",
                bits.len()
            )));
        }
        let header = Self {
            n: read_msb_first(&bits[0..32]) as u32,
            variant_tag: read_msb_first(&bits[32..40]) as u8,
            param: read_msb_first(&bits[40..72]) as u32,
            lowres_int_bits: read_msb_first(&bits[72..80]) as u8,
        };
        header.spec()?;
        Ok((header, &bits[FRAME_HEADER_BITS..]))
    }
}

fn check_frame_len(bits: &[bool], n: usize, per: usize, what: &str) -> Result<()> {
    if bits.len() != n * per {
        return Err(Error::framing(format!(
            "{what} stream has {} bits, expected {n} x {per}",
            bits.len()
        )));
    }
    Ok(())
}

/// Encodes the low-resolution part: two's-complement step counts for fixed
/// point, one bit per component (`1` for `-1`) for the sign variant.
pub fn encode_lowres(w1: &ModelVector, spec: &QuantizerSpec) -> Result<Bits> {
    spec.validate()?;
    let per = spec.lowres_bits_per_component();
    let mut bits = Vec::with_capacity(w1.len() * per);
    match spec.variant {
        QuantizerVariant::FixedPoint { decimals } => {
            let fp = FixedPoint::new(decimals, spec.lowres_int_bits)?;
            let mask = (1u64 << per) - 1;
            for k in fp.steps_of_representable(w1)? {
                push_msb_first(&mut bits, (k as u64) & mask, per);
            }
        }
        QuantizerVariant::SignScale { .. } => {
            for (i, &v) in w1.iter().enumerate() {
                match v {
                    1.0 => bits.push(false),
                    -1.0 => bits.push(true),
                    _ => {
                        return Err(Error::Encoding(format!(
                            "component {i} = {v} is not a sign"
                        )))
                    }
                }
            }
        }
    }
    Ok(bits)
}

pub fn decode_lowres(bits: &[bool], spec: &QuantizerSpec, n: usize) -> Result<ModelVector> {
    let per = spec.lowres_bits_per_component();
    check_frame_len(bits, n, per, "low-resolution")?;
    let values = match spec.variant {
        QuantizerVariant::FixedPoint { decimals } => {
            let fp = FixedPoint::new(decimals, spec.lowres_int_bits)?;
            let shift = 64 - per as u32;
            bits.chunks(per)
                .map(|c| {
                    // sign-extend the two's-complement field
                    let k = ((read_msb_first(c) << shift) as i64) >> shift;
                    fp.step_value(k)
                })
                .collect()
        }
        QuantizerVariant::SignScale { .. } => {
            bits.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect()
        }
    };
    Ok(ModelVector::from_vec_unchecked(values))
}

/// Encodes the residual as IEEE-754 binary32 words.
pub fn encode_hires(w2: &ModelVector) -> Result<Bits> {
    let mut bits = Vec::with_capacity(w2.len() * HIRES_BITS);
    for (i, &v) in w2.iter().enumerate() {
        let narrow = v as f32;
        if !narrow.is_finite() {
            return Err(Error::Encoding(format!(
                "component {i} = {v} overflows binary32"
            )));
        }
        push_msb_first(&mut bits, u64::from(narrow.to_bits()), HIRES_BITS);
    }
    Ok(bits)
}

/// Decodes binary32 words. Corrupted words may decode to non-finite values;
/// they are passed through unchanged.
pub fn decode_hires(bits: &[bool], n: usize) -> Result<Vec<f64>> {
    check_frame_len(bits, n, HIRES_BITS, "high-resolution")?;
    Ok(bits
        .chunks(HIRES_BITS)
        .map(|c| f64::from(f32::from_bits(read_msb_first(c) as u32)))
        .collect())
}
