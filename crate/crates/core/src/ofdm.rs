//! Non-contiguous OFDM baseline: QPSK on the subcarriers that fall inside
//! the channel passbands, cyclic prefix, zero-forcing equalization with
//! known channel state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::dsp::{BasebandFrame, UnitaryDft};
use crate::error::{Error, Result};

/// Geometry of one OFDM symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmConfig {
    pub nfft: usize,
    pub cp: usize,
    /// Inclusive `(low, high)` edges in Hz.
    pub passbands: Vec<(f64, f64)>,
    pub f_c: f64,
    pub f_s: f64,
    pub u: usize,
}

impl OfdmConfig {
    pub fn reference() -> Self {
        Self {
            nfft: 512,
            cp: 64,
            passbands: vec![(878.0, 1049.0), (1169.0, 1320.0)],
            f_c: 848.0,
            f_s: 2048.0,
            u: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nfft == 0 {
            return Err(Error::invalid("nfft", "must be at least 1"));
        }
        if self.cp >= self.nfft {
            return Err(Error::invalid("cp", "cyclic prefix must be shorter than the symbol"));
        }
        if self.u == 0 || !(self.f_s > 0.0) {
            return Err(Error::invalid("u", "sample rate and upsampling factor must be positive"));
        }
        if subcarrier_indices(&self.passbands, self.f_c, self.nfft, self.f_s, self.u)?.is_empty() {
            return Err(Error::invalid("passbands", "no subcarrier falls inside the passbands"));
        }
        Ok(())
    }

    /// Samples per symbol including the prefix.
    pub fn frame_len(&self) -> usize {
        self.nfft + self.cp
    }

    pub fn spacing_hz(&self) -> f64 {
        self.f_s / (self.u * self.nfft) as f64
    }

    pub fn subcarriers(&self) -> Result<Vec<usize>> {
        subcarrier_indices(&self.passbands, self.f_c, self.nfft, self.f_s, self.u)
    }

    pub fn bits_per_frame(&self) -> Result<usize> {
        Ok(2 * self.subcarriers()?.len())
    }

    /// Bits per baseband sample, prefix included.
    pub fn rate(&self) -> Result<f64> {
        Ok(self.bits_per_frame()? as f64 / self.frame_len() as f64)
    }
}

/// Baseband subcarriers `k` whose frequency `f_c + k f_s / (u nfft)` lies in
/// at least one passband, ascending and without duplicates.
pub fn subcarrier_indices(passbands: &[(f64, f64)], f_c: f64, nfft: usize, f_s: f64, u: usize) -> Result<Vec<usize>> {
    if nfft == 0 || u == 0 || !(f_s > 0.0) {
        return Err(Error::invalid("nfft", "grid parameters must be positive"));
    }
    let spacing = f_s / (u * nfft) as f64;
    let top = f_c + f_s / u as f64;
    for &(lo, hi) in passbands {
        if !(lo <= hi) {
            return Err(Error::invalid("passbands", format!("edge order in ({lo}, {hi})")));
        }
        if lo < f_c || hi > top {
            return Err(Error::invalid(
                "passbands",
                format!("({lo}, {hi}) Hz is outside the modulated band [{f_c}, {top}] Hz"),
            ));
        }
    }
    Ok((0..nfft)
        .filter(|&k| {
            let f = f_c + k as f64 * spacing;
            passbands.iter().any(|&(lo, hi)| f >= lo && f <= hi)
        })
        .collect())
}

const QPSK_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gray-coded QPSK, two bits per symbol: the first bit sets the sign of the
/// real part, the second of the imaginary part (0 is positive).
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::invalid("bits", "QPSK needs an even number of bits"));
    }
    bits.chunks_exact(2)
        .map(|pair| {
            let level = |b: u8| match b {
                0 => Ok(QPSK_SCALE),
                1 => Ok(-QPSK_SCALE),
                other => Err(Error::invalid("bits", format!("entries must be 0 or 1, found {other}"))),
            };
            Ok(Complex64::new(level(pair[0])?, level(pair[1])?))
        })
        .collect()
}

/// Sign decisions; insensitive to positive scaling of the symbols.
pub fn qpsk_demap(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)])
        .collect()
}

/// Places arbitrary symbols on the active subcarriers, then IDFT, prefix and
/// power normalization. An all-zero loading gives an all-zero frame.
pub fn load_subcarriers(symbols: &[Complex64], config: &OfdmConfig) -> Result<BasebandFrame> {
    let active = config.subcarriers()?;
    if symbols.len() != active.len() {
        return Err(Error::Shape {
            context: "active subcarriers",
            expected: active.len(),
            actual: symbols.len(),
        });
    }
    let mut grid = vec![Complex64::new(0.0, 0.0); config.nfft];
    for (&k, &s) in active.iter().zip(symbols) {
        grid[k] = s;
    }
    UnitaryDft::new(config.nfft).inverse(&mut grid);
    let mut frame = Vec::with_capacity(config.frame_len());
    frame.extend_from_slice(&grid[config.nfft - config.cp..]);
    frame.extend_from_slice(&grid);
    let power = crate::dsp::mean_power(&frame);
    if power > 0.0 {
        let scale = 1.0 / power.sqrt();
        frame.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(BasebandFrame(frame))
}

/// QPSK-modulates `2 K` bits into one unit-power frame of `nfft + cp` samples.
pub fn ofdm_modulate(bits: &[u8], config: &OfdmConfig) -> Result<BasebandFrame> {
    let expected = config.bits_per_frame()?;
    if bits.len() != expected {
        return Err(Error::Shape {
            context: "OFDM bits per frame",
            expected,
            actual: bits.len(),
        });
    }
    load_subcarriers(&qpsk_map(bits)?, config)
}

/// Channel gain at each active subcarrier, one entry per subcarrier.
#[derive(Clone, Debug, PartialEq)]
pub struct Csi(pub Vec<Complex64>);

/// Perfect channel knowledge: the channel's frequency response evaluated at
/// the absolute frequency of each active subcarrier.
pub fn known_csi(channel: &ChannelRealization, config: &OfdmConfig) -> Result<Csi> {
    let spacing = config.spacing_hz();
    Ok(Csi(config
        .subcarriers()?
        .into_iter()
        .map(|k| channel.gain_at(config.f_c + k as f64 * spacing))
        .collect()))
}

/// Equalized symbols on the active subcarriers of one received frame.
pub fn equalize(frame: &BasebandFrame, csi: &Csi, config: &OfdmConfig) -> Result<Vec<Complex64>> {
    if frame.len() != config.frame_len() {
        return Err(Error::Shape {
            context: "OFDM frame length (nfft + cp)",
            expected: config.frame_len(),
            actual: frame.len(),
        });
    }
    let active = config.subcarriers()?;
    if csi.0.len() != active.len() {
        return Err(Error::Shape {
            context: "CSI entries",
            expected: active.len(),
            actual: csi.0.len(),
        });
    }
    let mut grid = frame.samples()[config.cp..].to_vec();
    UnitaryDft::new(config.nfft).forward(&mut grid);
    active
        .iter()
        .zip(&csi.0)
        .map(|(&k, &h)| {
            if h.norm_sqr() == 0.0 {
                Err(Error::ZeroGain(k))
            } else {
                Ok(grid[k] / h)
            }
        })
        .collect()
}

/// Zero-forcing equalization followed by QPSK sign decisions.
pub fn ofdm_demodulate(frame: &BasebandFrame, csi: &Csi, config: &OfdmConfig) -> Result<Vec<u8>> {
    Ok(qpsk_demap(&equalize(frame, csi, config)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_subcarriers() {
        let cfg = OfdmConfig::reference();
        let k = cfg.subcarriers().unwrap();
        assert_eq!(k.len(), 324);
        let low: Vec<usize> = (30..=201).collect();
        let high: Vec<usize> = (321..=472).collect();
        assert_eq!(&k[..172], low.as_slice());
        assert_eq!(&k[172..], high.as_slice());
        assert_eq!(cfg.bits_per_frame().unwrap(), 648);
        assert_eq!(cfg.rate().unwrap(), 1.125);
    }

    #[test]
    fn full_band_uses_every_subcarrier() {
        let k = subcarrier_indices(&[(848.0, 1360.0)], 848.0, 512, 2048.0, 4).unwrap();
        assert_eq!(k, (0..512).collect::<Vec<_>>());
    }

    #[test]
    fn overlapping_passbands_deduplicated() {
        let k = subcarrier_indices(&[(900.0, 1000.0), (950.0, 1100.0)], 848.0, 512, 2048.0, 4).unwrap();
        assert_eq!(k, (52..=252).collect::<Vec<_>>());
    }

    #[test]
    fn passband_outside_band_rejected() {
        assert!(subcarrier_indices(&[(800.0, 900.0)], 848.0, 512, 2048.0, 4).is_err());
    }

    #[test]
    fn qpsk_is_gray_and_unit_energy() {
        let s = qpsk_map(&[0, 0, 0, 1, 1, 1, 1, 0]).unwrap();
        for v in &s {
            assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
        }
        assert_eq!(qpsk_demap(&s), vec![0, 0, 0, 1, 1, 1, 1, 0]);
        // neighbours in phase differ in one bit
        let order = [(0u8, 0u8), (1, 0), (1, 1), (0, 1)];
        for w in order.windows(2) {
            assert_eq!((w[0].0 ^ w[1].0) + (w[0].1 ^ w[1].1), 1);
        }
        assert!(qpsk_map(&[0, 2]).is_err());
        assert!(qpsk_map(&[0]).is_err());
    }

    #[test]
    fn modulated_frame_shape_and_power() {
        let cfg = OfdmConfig::reference();
        let bits: Vec<u8> = (0..648).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let f = ofdm_modulate(&bits, &cfg).unwrap();
        assert_eq!(f.len(), 576);
        assert!((f.mean_power() - 1.0).abs() < 1e-12);
        assert_eq!(&f.samples()[..64], &f.samples()[512..]);
        assert!(ofdm_modulate(&bits[..646], &cfg).is_err());
    }

    #[test]
    fn zero_loading_gives_zero_frame() {
        let cfg = OfdmConfig::reference();
        let f = load_subcarriers(&vec![Complex64::new(0.0, 0.0); 324], &cfg).unwrap();
        assert!(f.samples().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn back_to_back_round_trip() {
        let cfg = OfdmConfig::reference();
        let bits: Vec<u8> = (0..648).map(|i| ((i * 13 + 1) % 7 % 2) as u8).collect();
        let f = ofdm_modulate(&bits, &cfg).unwrap();
        let flat = Csi(vec![Complex64::new(1.0, 0.0); 324]);
        assert_eq!(ofdm_demodulate(&f, &flat, &cfg).unwrap(), bits);
    }

    #[test]
    fn zero_gain_reported() {
        let cfg = OfdmConfig::reference();
        let mut csi = Csi(vec![Complex64::new(1.0, 0.0); 324]);
        csi.0[5] = Complex64::new(0.0, 0.0);
        let f = load_subcarriers(&vec![Complex64::new(1.0, 0.0); 324], &cfg).unwrap();
        assert!(matches!(ofdm_demodulate(&f, &csi, &cfg), Err(Error::ZeroGain(35))));
    }
}
