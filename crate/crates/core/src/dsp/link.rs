use num_complex::Complex64;
use rand::Rng;

use super::carrier::{CarrierMap, Resampler};
use super::convolve::{add_awgn, ChannelConvolver};
use crate::error::{Error, Result};

/// The full transmit-channel-receive chain for one packet of `p` frames:
/// per-frame upconversion, concatenation, truncated convolution with the
/// channel, AWGN, split, per-frame downconversion.
#[derive(Clone, Debug)]
pub struct PacketLink {
    map: CarrierMap,
    frames_per_packet: usize,
    resampler: Resampler,
    convolver: ChannelConvolver,
    noise_variance: f64,
    passband: Vec<Complex64>,
    received: Vec<Complex64>,
}

impl PacketLink {
    pub fn new(map: CarrierMap, frames_per_packet: usize, impulse: &[Complex64], noise_variance: f64) -> Result<Self> {
        if frames_per_packet == 0 {
            return Err(Error::invalid("p", "packet must hold at least one frame"));
        }
        if !(noise_variance >= 0.0) {
            return Err(Error::invalid("noise variance", format!("must be non-negative, got {noise_variance}")));
        }
        let packet_len = map.passband_len() * frames_per_packet;
        Ok(Self {
            map,
            frames_per_packet,
            resampler: Resampler::new(map),
            convolver: ChannelConvolver::new(impulse, packet_len)?,
            noise_variance,
            passband: vec![Complex64::new(0.0, 0.0); packet_len],
            received: vec![Complex64::new(0.0, 0.0); packet_len],
        })
    }

    pub fn map(&self) -> CarrierMap {
        self.map
    }

    pub fn frames_per_packet(&self) -> usize {
        self.frames_per_packet
    }

    /// Baseband samples per packet, `p * n`.
    pub fn baseband_len(&self) -> usize {
        self.map.n * self.frames_per_packet
    }

    /// Channel-rate samples per packet, `p * u * n`.
    pub fn packet_len(&self) -> usize {
        self.map.passband_len() * self.frames_per_packet
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn set_noise_variance(&mut self, variance: f64) {
        self.noise_variance = variance.max(0.0);
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.baseband_len() {
            return Err(Error::Shape {
                context: "packet frames (p * n)",
                expected: self.baseband_len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Upconverts and concatenates `p` frames into one channel-rate packet.
    pub fn modulate(&mut self, frames: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(frames.len())?;
        let (n, un) = (self.map.n, self.map.passband_len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.packet_len()];
        for (frame, slot) in frames.chunks_exact(n).zip(out.chunks_exact_mut(un)) {
            self.resampler.to_passband(frame, slot);
        }
        Ok(out)
    }

    /// Sends `p` frames through the channel; `out` receives `p` baseband frames.
    pub fn transmit<R: Rng + ?Sized>(&mut self, frames: &[Complex64], rng: &mut R, out: &mut [Complex64]) -> Result<()> {
        self.check(frames.len())?;
        self.check(out.len())?;
        let (n, un) = (self.map.n, self.map.passband_len());
        for (frame, slot) in frames.chunks_exact(n).zip(self.passband.chunks_exact_mut(un)) {
            self.resampler.to_passband(frame, slot);
        }
        self.convolver.apply(&self.passband, &mut self.received);
        add_awgn(&mut self.received, self.noise_variance, rng);
        for (slot, frame) in self.received.chunks_exact(un).zip(out.chunks_exact_mut(n)) {
            self.resampler.to_baseband(slot, frame);
        }
        Ok(())
    }

    /// Adjoint of the noiseless chain, mapping received-frame gradients to
    /// transmitted-frame gradients. Additive noise does not change them.
    pub fn adjoint(&mut self, grad: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.check(grad.len())?;
        self.check(out.len())?;
        let (n, un) = (self.map.n, self.map.passband_len());
        for (g, slot) in grad.chunks_exact(n).zip(self.received.chunks_exact_mut(un)) {
            self.resampler.to_baseband_adjoint(g, slot);
        }
        self.convolver.adjoint(&self.received, &mut self.passband);
        for (slot, o) in self.passband.chunks_exact(un).zip(out.chunks_exact_mut(n)) {
            self.resampler.to_passband_adjoint(slot, o);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn delta(at: usize, len: usize) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); len];
        h[at] = Complex64::new(1.0, 0.0);
        h
    }

    fn random(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn identity_channel_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let map = CarrierMap::new(16, 4, 512.0, 2048.0).unwrap();
        let mut link = PacketLink::new(map, 3, &delta(0, 32), 0.0).unwrap();
        let x = random(48, &mut rng);
        let mut y = vec![Complex64::new(0.0, 0.0); 48];
        link.transmit(&x, &mut rng, &mut y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn one_frame_delay_moves_frames_by_one_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let map = CarrierMap::new(8, 2, 0.0, 16.0).unwrap();
        let un = map.passband_len();
        let mut link = PacketLink::new(map, 4, &delta(un, un + 1), 0.0).unwrap();
        let x = random(32, &mut rng);
        let mut y = vec![Complex64::new(0.0, 0.0); 32];
        link.transmit(&x, &mut rng, &mut y).unwrap();
        assert!(y[..8].iter().all(|v| v.norm() < 1e-10));
        for i in 8..32 {
            assert!((y[i] - x[i - 8]).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let map = CarrierMap::new(8, 4, 0.0, 32.0).unwrap();
        let h = random(20, &mut rng);
        let mut link = PacketLink::new(map, 3, &h, 0.0).unwrap();
        let x = random(24, &mut rng);
        let g = random(24, &mut rng);
        let mut ax = vec![Complex64::new(0.0, 0.0); 24];
        let mut atg = vec![Complex64::new(0.0, 0.0); 24];
        link.transmit(&x, &mut rng, &mut ax).unwrap();
        link.adjoint(&g, &mut atg).unwrap();
        let lhs: Complex64 = ax.iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = x.iter().zip(&atg).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn wrong_frame_count_rejected() {
        let map = CarrierMap::new(8, 2, 0.0, 16.0).unwrap();
        let mut link = PacketLink::new(map, 2, &delta(0, 4), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut y = vec![Complex64::new(0.0, 0.0); 16];
        assert!(link.transmit(&[Complex64::new(0.0, 0.0); 8], &mut rng, &mut y).is_err());
    }
}
