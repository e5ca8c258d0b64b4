//! Multi-resolution downlink model broadcast for federated learning.
//!
//! A parameter server splits its model into a coarse part and a fine
//! residual, maps them onto separate bit planes of a non-uniform 8-PSK
//! constellation and broadcasts one shared symbol stream. Receivers with a
//! good channel recover all three bits per symbol and the full model; weak
//! receivers only separate the four symbol pairs and track the coarse model.
//!
//! Module map:
//!
//! - [`modem`]: constellation, AWGN channel, demodulators, Monte Carlo error rates.
//! - [`quantizer`]: model partitioning and the bit-plane wire format.
//! - [`broadcast`]: differential encoder/decoder state and transport.
//! - [`flcore`]: MLP with manual backprop, local SGD, FedAvg, FL rounds.
//! - [`dataio`]: MNIST IDX parsing and agent partitioning.
//! - [`harness`]: experiment configuration, multi-seed runs, CSV output.
//!
//! Numeric kernels (constellation geometry, channel, network) are generic
//! over [`Real`]; the aliases below pin the common instantiations.

pub mod broadcast;
pub mod dataio;
pub mod error;
pub mod flcore;
pub mod harness;
pub mod modem;
pub mod quantizer;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use quantizer::ModelVector;
pub use scalar::Real;

pub type Constellation64 = modem::Constellation<f64>;
pub type Constellation32 = modem::Constellation<f32>;
pub type Mlp64 = flcore::Mlp<f64>;
pub type Mlp32 = flcore::Mlp<f32>;
pub type Complex64 = num_complex::Complex<f64>;
