use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::fourier::{fast_len, UnitaryDft};
use super::PassbandPacket;
use crate::error::{Error, Result};

/// Complex AWGN at the channel rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Power per complex channel-rate sample.
    pub variance: f64,
    /// Seed of the stream the noise is drawn from, recorded for reproducibility.
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::invalid("noise variance", format!("must be positive, got {variance}")));
        }
        Ok(Self { variance, seed })
    }
}

/// Channel-rate noise variance for a given `E_b/N_0`.
///
/// Frames carry unit power per baseband sample, so `E_b = 1/r` and the
/// baseband variance is `1/(r E_b/N_0)`. Power-preserving upsampling by `u`
/// spreads each symbol over `u` channel samples, hence the extra factor `u`.
pub fn noise_variance(ebno_db: f64, bits_per_sample: f64, u: usize) -> Result<f64> {
    if !(bits_per_sample > 0.0) {
        return Err(Error::invalid("r", format!("rate must be positive, got {bits_per_sample}")));
    }
    if u == 0 {
        return Err(Error::invalid("u", "upsampling factor must be at least 1"));
    }
    Ok(u as f64 / (bits_per_sample * 10f64.powf(ebno_db / 10.0)))
}

/// Adds circularly-symmetric complex Gaussian noise of the given variance.
pub fn add_awgn<R: Rng + ?Sized>(samples: &mut [Complex64], variance: f64, rng: &mut R) {
    if variance <= 0.0 {
        return;
    }
    let sd = (variance / 2.0).sqrt();
    for v in samples.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(re * sd, im * sd);
    }
}

/// Linear convolution with a fixed impulse response, truncated to the
/// input length (the trailing `l - 1` samples are dropped). FFT based.
#[derive(Clone, Debug)]
pub struct ChannelConvolver {
    input_len: usize,
    impulse_len: usize,
    dft: UnitaryDft,
    spectrum: Vec<Complex64>,
    buf: Vec<Complex64>,
}

impl ChannelConvolver {
    pub fn new(impulse: &[Complex64], input_len: usize) -> Result<Self> {
        if impulse.is_empty() {
            return Err(Error::invalid("h", "impulse response is empty"));
        }
        if input_len == 0 {
            return Err(Error::invalid("packet", "packet is empty"));
        }
        let fft_len = fast_len(input_len + impulse.len() - 1);
        let mut dft = UnitaryDft::with_planner(fft_len, &mut FftPlanner::new());
        let mut spectrum = vec![Complex64::new(0.0, 0.0); fft_len];
        spectrum[..impulse.len()].copy_from_slice(impulse);
        dft.forward_raw(&mut spectrum);
        // fold the 1/len of the inverse into the stored spectrum
        let scale = 1.0 / fft_len as f64;
        spectrum.iter_mut().for_each(|v| *v *= scale);
        Ok(Self {
            input_len,
            impulse_len: impulse.len(),
            dft,
            spectrum,
            buf: vec![Complex64::new(0.0, 0.0); fft_len],
        })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn impulse_len(&self) -> usize {
        self.impulse_len
    }

    /// `out[i] = sum_j h[j] x[i - j]` for `i < input_len`.
    pub fn apply(&mut self, x: &[Complex64], out: &mut [Complex64]) {
        self.filter(x, out, false);
    }

    /// Adjoint of [`ChannelConvolver::apply`]: correlation with `conj(h)`
    /// over the kept support, `out[j] = sum_i conj(h[i - j]) g[i]`.
    pub fn adjoint(&mut self, grad: &[Complex64], out: &mut [Complex64]) {
        self.filter(grad, out, true);
    }

    fn filter(&mut self, x: &[Complex64], out: &mut [Complex64], conjugate: bool) {
        let n = self.input_len;
        assert_eq!(x.len(), n, "convolver input length");
        assert_eq!(out.len(), n, "convolver output length");
        self.buf[..n].copy_from_slice(x);
        self.buf[n..].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        self.dft.forward_raw(&mut self.buf);
        if conjugate {
            for (b, h) in self.buf.iter_mut().zip(&self.spectrum) {
                *b *= h.conj();
            }
        } else {
            for (b, h) in self.buf.iter_mut().zip(&self.spectrum) {
                *b *= h;
            }
        }
        self.dft.inverse_raw(&mut self.buf);
        out.copy_from_slice(&self.buf[..n]);
    }
}

/// `y = (x * h)[..len(x)] + n`.
pub fn apply_channel<R: Rng + ?Sized>(
    packet: &PassbandPacket,
    impulse: &[Complex64],
    noise: Option<&NoiseSpec>,
    rng: &mut R,
) -> Result<PassbandPacket> {
    let mut conv = ChannelConvolver::new(impulse, packet.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); packet.len()];
    conv.apply(&packet.samples, &mut out);
    if let Some(noise) = noise {
        add_awgn(&mut out, noise.variance, rng);
    }
    Ok(PassbandPacket::new(out, packet.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn direct_truncated(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, hj) in h.iter().enumerate() {
                    if j <= i {
                        acc += hj * x[i - j];
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn variance_formula() {
        assert!((noise_variance(0.0, 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        let v = noise_variance(3.0, 1.125, 4).unwrap();
        assert!((v - 1.782_0).abs() < 1e-4, "{v}");
        assert!((v / 4.0 - 0.445_5).abs() < 1e-4);
        assert!(noise_variance(400.0, 1.125, 4).unwrap() < 1e-39);
        assert!(noise_variance(3.0, 0.0, 4).is_err());
        assert!(noise_variance(3.0, 1.0, 0).is_err());
    }

    #[test]
    fn identity_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = PassbandPacket::new(random(100, &mut rng), 2048.0);
        let mut h = vec![Complex64::new(0.0, 0.0); 16];
        h[0] = Complex64::new(1.0, 0.0);
        let y = apply_channel(&x, &h, None, &mut rng).unwrap();
        for (a, b) in y.samples.iter().zip(&x.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delay_channel_shifts_and_truncates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = PassbandPacket::new(random(50, &mut rng), 2048.0);
        let mut h = vec![Complex64::new(0.0, 0.0); 8];
        h[3] = Complex64::new(1.0, 0.0);
        let y = apply_channel(&x, &h, None, &mut rng).unwrap();
        assert_eq!(y.len(), 50);
        for i in 0..3 {
            assert!(y.samples[i].norm() < 1e-12);
        }
        for i in 3..50 {
            assert!((y.samples[i] - x.samples[i - 3]).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(300, &mut rng);
        let h = random(77, &mut rng);
        let want = direct_truncated(&x, &h);
        let mut conv = ChannelConvolver::new(&h, 300).unwrap();
        let mut got = vec![Complex64::new(0.0, 0.0); 300];
        conv.apply(&x, &mut got);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(200, &mut rng);
        let g = random(200, &mut rng);
        let h = random(64, &mut rng);
        let mut conv = ChannelConvolver::new(&h, 200).unwrap();
        let mut ax = vec![Complex64::new(0.0, 0.0); 200];
        let mut atg = vec![Complex64::new(0.0, 0.0); 200];
        conv.apply(&x, &mut ax);
        conv.adjoint(&g, &mut atg);
        let lhs: Complex64 = ax.iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = x.iter().zip(&atg).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn noise_spec_rejects_non_positive() {
        assert!(NoiseSpec::new(0.0, 1).is_err());
        assert!(NoiseSpec::new(0.5, 1).is_ok());
    }
}
