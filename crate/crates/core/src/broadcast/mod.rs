//! Differential multi-resolution broadcast.
//!
//! Each round the server sends `d = Q(w - t)`, where `t` is the accumulated
//! low-resolution model, then updates `t <- t + d` and sends the residual
//! `w2 = w - t` narrowed to binary32. Every agent applies `d` to its own copy
//! of `t`; high-SNR agents additionally add `w2`. Both sides start from
//! `t = 0`, so the first round carries a full quantized model.

mod state;
mod trace;
mod transport;

pub use state::{AgentClass, AgentDecoderState, LowResTrack, ReceivedPayload, RoundPayload, ServerCodecState};
pub use trace::{fnv1a, RoundTrace};
pub use transport::{receive_streams, transmit_round, Transport, TransportMode};
