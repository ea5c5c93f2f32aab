//! Signal-path arithmetic shared by both modems.
//!
//! All transforms use the unitary DFT normalization, so energy is preserved
//! and adjoints are plain conjugate transposes.

mod carrier;
mod convolve;
mod fourier;
mod link;
mod papr;
mod spectrum;

pub use carrier::{frame_to_passband, passband_to_frame, CarrierMap, Resampler};
pub use convolve::{add_awgn, apply_channel, noise_variance, ChannelConvolver, NoiseSpec};
pub use fourier::{fast_len, UnitaryDft};
pub use link::PacketLink;
pub use papr::{papr, papr_db, papr_with_grad, smooth_papr_with_grad, Oversampler, DEFAULT_OVERSAMPLE};
pub use spectrum::{ccdf, welch_psd, WelchParams};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One complex baseband frame (AE symbol or OFDM symbol with CP).
#[derive(Clone, Debug, PartialEq)]
pub struct BasebandFrame(pub Vec<Complex64>);

impl BasebandFrame {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.0
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.0)
    }
}

/// `p` upconverted frames back to back at the channel rate.
#[derive(Clone, Debug, PartialEq)]
pub struct PassbandPacket {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl PassbandPacket {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Self { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Interleaved `(re, im)` pairs to complex samples.
pub fn pairs_to_complex(values: &[f64]) -> Result<Vec<Complex64>> {
    if values.len() % 2 != 0 {
        return Err(Error::Shape {
            context: "real pairs",
            expected: values.len() + 1,
            actual: values.len(),
        });
    }
    Ok(values
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect())
}

pub fn complex_to_pairs(values: &[Complex64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), 2 * values.len());
    for (o, v) in out.chunks_exact_mut(2).zip(values) {
        o[0] = v.re;
        o[1] = v.im;
    }
}
