//! Rate matching of the two streams onto 3-bit symbols.
//!
//! Symbol `k` carries low-resolution bits `2k` and `2k + 1` on planes 1 and
//! 2 and high-resolution bit `k` on plane 3. The shorter stream is
//! zero-padded up to `max(ceil(low / 2), high)` symbols.

use super::wire::{Bits, FrameHeader};
use super::ModelVector;
use crate::error::{Error, Result};

/// Stream lengths and the frame header they belong to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Framing {
    pub header: FrameHeader,
    pub lowres_len: usize,
    pub hires_len: usize,
}

impl Framing {
    pub fn symbols(&self) -> usize {
        symbol_count(self.lowres_len, self.hires_len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitPlaneStreams {
    pub lowres_bits: Bits,
    /// Absent when only planes 1-2 were recovered.
    pub hires_bits: Option<Bits>,
    pub framing: Framing,
}

impl BitPlaneStreams {
    /// Streams for an encoded model, with lengths taken from the bits.
    pub fn new(header: FrameHeader, lowres_bits: Bits, hires_bits: Bits) -> Self {
        let framing = Framing {
            header,
            lowres_len: lowres_bits.len(),
            hires_len: hires_bits.len(),
        };
        Self {
            lowres_bits,
            hires_bits: Some(hires_bits),
            framing,
        }
    }

    /// Decodes the low-resolution stream under its header.
    pub fn decode_lowres(&self) -> Result<ModelVector> {
        let spec = self.framing.header.spec()?;
        super::decode_lowres(&self.lowres_bits, &spec, self.framing.header.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneMode {
    /// All three planes.
    Full,
    /// Planes 1-2 only.
    Coarse,
}

pub fn symbol_count(lowres_len: usize, hires_len: usize) -> usize {
    lowres_len.div_ceil(2).max(hires_len)
}

pub fn pack_symbols(streams: &BitPlaneStreams) -> Result<Vec<u8>> {
    let f = &streams.framing;
    let empty = Vec::new();
    let hires = streams.hires_bits.as_ref().unwrap_or(&empty);
    if streams.lowres_bits.len() != f.lowres_len || hires.len() != f.hires_len {
        return Err(Error::framing(format!(
            "stream lengths ({}, {}) disagree with framing ({}, {})",
            streams.lowres_bits.len(),
            hires.len(),
            f.lowres_len,
            f.hires_len
        )));
    }
    let low = |i: usize| u8::from(streams.lowres_bits.get(i).copied().unwrap_or(false));
    Ok((0..f.symbols())
        .map(|k| {
            let high = u8::from(hires.get(k).copied().unwrap_or(false));
            (low(2 * k) << 2) | (low(2 * k + 1) << 1) | high
        })
        .collect())
}

/// Inverse of [`pack_symbols`]. In coarse mode only planes 1-2 of each word
/// are read and the high-resolution stream is absent.
pub fn unpack_symbols(words: &[u8], framing: &Framing, mode: PlaneMode) -> Result<BitPlaneStreams> {
    if words.len() != framing.symbols() {
        return Err(Error::framing(format!(
            "{} symbols received, framing expects {}",
            words.len(),
            framing.symbols()
        )));
    }
    let lowres_bits = (0..framing.lowres_len)
        .map(|i| {
            let w = words[i / 2];
            let plane = if i % 2 == 0 { 2 } else { 1 };
            (w >> plane) & 1 == 1
        })
        .collect();
    let hires_bits = match mode {
        PlaneMode::Full => Some(words[..framing.hires_len].iter().map(|w| w & 1 == 1).collect()),
        PlaneMode::Coarse => None,
    };
    Ok(BitPlaneStreams {
        lowres_bits,
        hires_bits,
        framing: *framing,
    })
}
