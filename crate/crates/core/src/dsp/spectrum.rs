use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier::UnitaryDft;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchParams {
    pub segment_len: usize,
    pub overlap: f64,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self {
            segment_len: 512,
            overlap: 0.5,
        }
    }
}

/// Averaged Hann-windowed periodogram of a complex signal.
///
/// Returns `(frequency_hz, density)` for bins `0..segment_len`, i.e. the
/// frequencies `0 .. f_s` in DFT order (complex signals here occupy positive
/// frequencies only). The density is scaled so that `sum(density) * f_s /
/// segment_len` estimates the mean signal power.
pub fn welch_psd(signal: &[Complex64], sample_rate: f64, params: WelchParams) -> Result<Vec<(f64, f64)>> {
    let WelchParams { segment_len, overlap } = params;
    if segment_len == 0 {
        return Err(Error::invalid("segment_len", "must be positive"));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::invalid("overlap", format!("must lie in [0, 1), got {overlap}")));
    }
    if signal.len() < segment_len {
        return Err(Error::invalid(
            "signal",
            format!("{} samples is shorter than one segment of {segment_len}", signal.len()),
        ));
    }
    let hop = ((segment_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
    // periodic Hann
    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / segment_len as f64).cos())
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let mut dft = UnitaryDft::new(segment_len);
    let mut acc = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut segments = 0usize;
    let mut start = 0;
    while start + segment_len <= signal.len() {
        for ((b, x), w) in buf.iter_mut().zip(&signal[start..start + segment_len]).zip(&window) {
            *b = x * w;
        }
        dft.forward_raw(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * sample_rate * window_energy);
    Ok(acc
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 * sample_rate / segment_len as f64, p * scale))
        .collect())
}

/// Fraction of `values` strictly above each threshold.
pub fn ccdf(values: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    if values.is_empty() {
        return thresholds.iter().map(|&t| (t, 0.0)).collect();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    thresholds
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&v| v <= t);
            (t, (sorted.len() - at_or_below) as f64 / n)
        })
        .collect()
}
