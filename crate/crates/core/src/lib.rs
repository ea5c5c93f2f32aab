//! Simulation of acoustic telemetry along a drill string: a transfer-matrix
//! channel model, an end-to-end trained autoencoder modem, and a
//! non-contiguous OFDM baseline evaluated on BER, PAPR and PSD.

pub mod ae;
pub mod channel;
pub mod digest;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod nn;
pub mod ofdm;
pub mod rng;

pub use channel::{ChannelRealization, DrillStringSpec, ScatterCoefficients, Segment};
pub use error::{Error, Result};
