use std::fmt::Write as _;

use rand::Rng;

use super::modem::{Modem, PacketSimulator};
use crate::dsp::{ccdf, papr_db, welch_psd, WelchParams};
use crate::error::Result;
use crate::rng::random_bits;

/// PAPR in dB of `frames` random frames, each oversampled `oversample` times.
pub fn papr_samples_db<R: Rng + ?Sized>(modem: &Modem, frames: usize, oversample: usize, rng: &mut R) -> Result<Vec<f64>> {
    const CHUNK: usize = 512;
    let n = modem.frame_len();
    let mut out = Vec::with_capacity(frames);
    while out.len() < frames {
        let count = CHUNK.min(frames - out.len());
        let bits = random_bits(count, modem.bits_per_frame(), rng);
        let bits: Vec<u8> = bits.data().iter().map(|&b| b as u8).collect();
        let samples = modem.modulate(&bits)?;
        for frame in samples.chunks_exact(n) {
            out.push(papr_db(frame, oversample)?);
        }
    }
    Ok(out)
}

/// The smallest level exceeded by at most a fraction `prob` of `values`.
pub fn exceedance_level(values: &[f64], prob: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((prob * sorted.len() as f64).floor() as usize).min(sorted.len().saturating_sub(1));
    sorted[k]
}

pub fn papr_ccdf_csv(values_db: &[f64], thresholds_db: &[f64], system: &str, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\n# system: {system}\n# frames: {}\n", values_db.len());
    out.push_str("papr_db,prob_exceed\n");
    for (t, p) in ccdf(values_db, thresholds_db) {
        let _ = writeln!(out, "{t:.4},{p:.8e}");
    }
    out
}

/// Welch PSD of `packets` random packets at the channel rate.
pub fn transmit_psd<R: Rng + ?Sized>(
    sim: &mut PacketSimulator,
    packets: usize,
    sample_rate: f64,
    params: WelchParams,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    let wave = sim.transmit_waveform(packets, rng)?;
    welch_psd(&wave, sample_rate, params)
}

/// Fraction of the estimated power whose frequency lies in any band.
pub fn inband_fraction(psd: &[(f64, f64)], bands: &[(f64, f64)]) -> f64 {
    let total: f64 = psd.iter().map(|(_, d)| d).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let inside: f64 = psd
        .iter()
        .filter(|(f, _)| bands.iter().any(|&(lo, hi)| *f >= lo && *f <= hi))
        .map(|(_, d)| d)
        .sum();
    inside / total
}

pub fn psd_csv(psd: &[(f64, f64)], system: &str, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\n# system: {system}\n");
    out.push_str("frequency_hz,density_db\n");
    for (f, d) in psd {
        let _ = writeln!(out, "{f:.4},{:.6}", 10.0 * d.max(1e-300).log10());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceedance_level_picks_the_quantile() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        // exactly one value (100) lies above 99
        assert_eq!(exceedance_level(&v, 0.01), 99.0);
        assert_eq!(exceedance_level(&v, 0.0), 100.0);
        let frac = v.iter().filter(|&&x| x > exceedance_level(&v, 0.05)).count();
        assert!(frac <= 5);
    }

    #[test]
    fn inband_fraction_counts_inclusive_edges() {
        let psd = vec![(0.0, 1.0), (1.0, 1.0), (2.0, 2.0), (3.0, 0.0)];
        assert_eq!(inband_fraction(&psd, &[(1.0, 2.0)]), 0.75);
        assert_eq!(inband_fraction(&psd, &[]), 0.0);
    }
}
