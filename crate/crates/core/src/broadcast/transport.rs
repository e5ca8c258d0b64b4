use num_complex::Complex;
use rayon::prelude::*;

use super::state::{AgentClass, AgentDecoderState, ReceivedPayload, RoundPayload};
use crate::error::{Error, Result};
use crate::modem::{awgn, demod_coarse, demod_full, modulate, ChannelSpec, Constellation};
use crate::quantizer::{decode_hires, unpack_symbols, BitPlaneStreams, Framing, PlaneMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportMode {
    /// Lossless delivery at the precision each agent class can decode.
    Ideal,
    /// Bit planes over non-uniform 8-PSK and per-agent AWGN.
    Physical,
}

#[derive(Debug, Clone)]
pub struct Transport {
    pub mode: TransportMode,
    pub constellation: Option<Constellation<f64>>,
}

impl Transport {
    pub fn ideal() -> Self {
        Self {
            mode: TransportMode::Ideal,
            constellation: None,
        }
    }

    pub fn physical(constellation: Constellation<f64>) -> Self {
        Self {
            mode: TransportMode::Physical,
            constellation: Some(constellation),
        }
    }
}

/// Demodulates one agent's copy of the broadcast and unpacks its streams.
///
/// High-SNR receivers use the full detector; low-SNR receivers only the
/// pair detector, whose 2-bit decisions land on planes 1-2.
pub fn receive_streams(
    symbols: &[Complex<f64>],
    framing: &Framing,
    class: AgentClass,
    channel: &ChannelSpec,
    c: &Constellation<f64>,
) -> Result<BitPlaneStreams> {
    let rx = awgn(symbols, channel);
    match class {
        AgentClass::HighSnr => unpack_symbols(&demod_full(&rx, c), framing, PlaneMode::Full),
        AgentClass::LowSnr => {
            let words: Vec<u8> = demod_coarse(&rx, c).into_iter().map(|w| w << 1).collect();
            unpack_symbols(&words, framing, PlaneMode::Coarse)
        }
    }
}

/// Delivers one round to every agent.
///
/// Physical mode modulates a single symbol sequence and passes it through
/// each agent's own channel; the channel seed is re-derived per round. The
/// frame header travels out of band. Corrupted payloads are delivered as
/// decoded, without detection.
///
/// Returns the per-agent payloads and the number of symbols on the air.
pub fn transmit_round(
    payload: &RoundPayload,
    agents: &[AgentDecoderState],
    transport: &Transport,
) -> Result<(Vec<ReceivedPayload>, usize)> {
    let n = payload.header.len();
    if payload.d.len() != n || payload.w2.len() != n {
        return Err(Error::Protocol(format!(
            "payload lengths ({}, {}) disagree with header n = {n}",
            payload.d.len(),
            payload.w2.len()
        )));
    }
    let spec = payload.header.spec()?;
    match transport.mode {
        TransportMode::Ideal => {
            let symbols = crate::quantizer::symbol_count(
                n * spec.lowres_bits_per_component(),
                n * crate::quantizer::HIRES_BITS,
            );
            let received = agents
                .iter()
                .map(|a| ReceivedPayload {
                    round_index: payload.round_index,
                    header: payload.header,
                    d: payload.d.clone(),
                    w2: (a.class == AgentClass::HighSnr).then(|| payload.w2.to_vec()),
                })
                .collect();
            Ok((received, symbols))
        }
        TransportMode::Physical => {
            let c = transport
                .constellation
                .as_ref()
                .ok_or_else(|| Error::Protocol("physical transport without a constellation".into()))?;
            let streams = payload.encode_streams()?;
            let words = crate::quantizer::pack_symbols(&streams)?;
            let symbols = modulate(&words, c)?;
            let framing = streams.framing;
            let received = agents
                .par_iter()
                .map(|a| {
                    let channel = a.channel.ok_or_else(|| {
                        Error::Protocol(format!("agent {} has no channel", a.id))
                    })?;
                    let channel = channel.substream(&[payload.round_index]);
                    let rx = receive_streams(&symbols, &framing, a.class, &channel, c)?;
                    let w2 = match &rx.hires_bits {
                        Some(bits) => Some(decode_hires(bits, n)?),
                        None => None,
                    };
                    Ok(ReceivedPayload {
                        round_index: payload.round_index,
                        header: payload.header,
                        d: rx.decode_lowres()?,
                        w2,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((received, symbols.len()))
        }
    }
}
