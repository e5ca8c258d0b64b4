use std::hash::Hasher;

use fnv::FnvHasher;

use super::state::RoundPayload;
use crate::error::Result;
use crate::quantizer::{bits_to_bytes, ModelVector};

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Per-round conformance record.
///
/// - `d_checksum`: FNV-1a over the frame header bits followed by the
///   low-resolution stream, packed MSB first.
/// - `w2_checksum`: FNV-1a over the high-resolution stream, packed MSB first.
/// - `agent_checksums`: FNV-1a over each agent's decoded model as big-endian
///   `f64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrace {
    pub round_index: u64,
    pub d_checksum: u64,
    pub w2_checksum: u64,
    pub agent_checksums: Vec<u64>,
}

impl RoundTrace {
    pub fn new(payload: &RoundPayload, agent_models: &[ModelVector]) -> Result<Self> {
        let streams = payload.encode_streams()?;
        let mut low = payload.header.encode();
        low.extend_from_slice(&streams.lowres_bits);
        let high = streams.hires_bits.unwrap_or_default();
        Ok(Self {
            round_index: payload.round_index,
            d_checksum: fnv1a(&bits_to_bytes(&low)),
            w2_checksum: fnv1a(&bits_to_bytes(&high)),
            agent_checksums: agent_models
                .iter()
                .map(|m| {
                    let bytes: Vec<u8> = m.iter().flat_map(|v| v.to_be_bytes()).collect();
                    fnv1a(&bytes)
                })
                .collect(),
        })
    }

    pub fn csv_header() -> &'static str {
        "round_index,d_checksum,w2_checksum,agent_checksums"
    }

    /// `round,d,w2,a0;a1;...` with checksums as 16-digit lowercase hex.
    pub fn to_csv_row(&self) -> String {
        let agents: Vec<String> = self.agent_checksums.iter().map(|c| format!("{c:016x}")).collect();
        format!(
            "{},{:016x},{:016x},{}",
            self.round_index,
            self.d_checksum,
            self.w2_checksum,
            agents.join(";")
        )
    }
}
