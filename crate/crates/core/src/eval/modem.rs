use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::ae::{hard_decisions, AEModel};
use crate::channel::ChannelRealization;
use crate::dsp::{complex_to_pairs, pairs_to_complex, CarrierMap, PacketLink};
use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::ofdm::{known_csi, ofdm_demodulate, ofdm_modulate, Csi, OfdmConfig};
use crate::rng::random_bits;

/// Either system under test, seen as a frame modem.
#[derive(Clone, Debug)]
pub enum Modem {
    Autoencoder(Arc<AEModel>),
    Ofdm {
        config: OfdmConfig,
        frames_per_packet: usize,
        csi: Csi,
    },
}

impl Modem {
    pub fn autoencoder(model: AEModel) -> Self {
        Modem::Autoencoder(Arc::new(model))
    }

    /// OFDM with perfect knowledge of `channel`.
    pub fn ofdm(config: OfdmConfig, frames_per_packet: usize, channel: &ChannelRealization) -> Result<Self> {
        config.validate()?;
        let csi = known_csi(channel, &config)?;
        Ok(Modem::Ofdm {
            config,
            frames_per_packet,
            csi,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Modem::Autoencoder(_) => "ae",
            Modem::Ofdm { .. } => "ofdm",
        }
    }

    /// Baseband samples per frame.
    pub fn frame_len(&self) -> usize {
        match self {
            Modem::Autoencoder(m) => m.config.n,
            Modem::Ofdm { config, .. } => config.frame_len(),
        }
    }

    pub fn bits_per_frame(&self) -> usize {
        match self {
            Modem::Autoencoder(m) => m.config.m,
            Modem::Ofdm { csi, .. } => 2 * csi.0.len(),
        }
    }

    pub fn frames_per_packet(&self) -> usize {
        match self {
            Modem::Autoencoder(m) => m.config.p,
            Modem::Ofdm { frames_per_packet, .. } => *frames_per_packet,
        }
    }

    pub fn upsampling(&self) -> usize {
        match self {
            Modem::Autoencoder(m) => m.config.u,
            Modem::Ofdm { config, .. } => config.u,
        }
    }

    pub fn carrier_map(&self) -> Result<CarrierMap> {
        match self {
            Modem::Autoencoder(m) => m.config.carrier_map(),
            Modem::Ofdm { config, .. } => CarrierMap::new(config.frame_len(), config.u, config.f_c, config.f_s),
        }
    }

    /// Bits per baseband sample.
    pub fn rate(&self) -> f64 {
        self.bits_per_frame() as f64 / self.frame_len() as f64
    }

    /// Unit-power frames, concatenated, for `bits.len() / bits_per_frame` frames.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let per = self.bits_per_frame();
        if bits.len() % per != 0 {
            return Err(Error::Shape {
                context: "bits (whole frames)",
                expected: (bits.len() / per + 1) * per,
                actual: bits.len(),
            });
        }
        let frames = bits.len() / per;
        match self {
            Modem::Autoencoder(model) => {
                let t = Tensor::from_vec(frames, per, bits.iter().map(|&b| f64::from(b)).collect())?;
                pairs_to_complex(model.encode(&t)?.data())
            }
            Modem::Ofdm { config, .. } => {
                let mut out = Vec::with_capacity(frames * config.frame_len());
                for chunk in bits.chunks_exact(per) {
                    out.extend_from_slice(ofdm_modulate(chunk, config)?.samples());
                }
                Ok(out)
            }
        }
    }

    /// Hard bit decisions for concatenated received frames.
    pub fn demodulate(&self, received: &[Complex64]) -> Result<Vec<u8>> {
        let n = self.frame_len();
        if received.len() % n != 0 {
            return Err(Error::Shape {
                context: "received samples (whole frames)",
                expected: (received.len() / n + 1) * n,
                actual: received.len(),
            });
        }
        match self {
            Modem::Autoencoder(model) => {
                let mut pairs = vec![0.0; 2 * received.len()];
                complex_to_pairs(received, &mut pairs);
                let t = Tensor::from_vec(received.len() / n, 2 * n, pairs)?;
                Ok(hard_decisions(&model.decode(&t)?))
            }
            Modem::Ofdm { config, csi, .. } => {
                let mut bits = Vec::with_capacity(self.bits_per_frame() * received.len() / n);
                for frame in received.chunks_exact(n) {
                    bits.extend(ofdm_demodulate(&crate::dsp::BasebandFrame(frame.to_vec()), csi, config)?);
                }
                Ok(bits)
            }
        }
    }
}

/// Runs whole packets of a modem through the channel.
#[derive(Clone)]
pub struct PacketSimulator {
    modem: Modem,
    link: PacketLink,
    packets_per_block: usize,
}

impl PacketSimulator {
    pub fn new(modem: Modem, channel: &ChannelRealization, packets_per_block: usize) -> Result<Self> {
        if packets_per_block == 0 {
            return Err(Error::invalid("packets_per_block", "must be at least 1"));
        }
        let link = PacketLink::new(modem.carrier_map()?, modem.frames_per_packet(), &channel.impulse, 0.0)?;
        Ok(Self {
            modem,
            link,
            packets_per_block,
        })
    }

    pub fn modem(&self) -> &Modem {
        &self.modem
    }

    pub fn bits_per_block(&self) -> usize {
        self.packets_per_block * self.modem.frames_per_packet() * self.modem.bits_per_frame()
    }

    /// Sends one block of random packets; returns `(bits, errors)`.
    pub fn run_block<R: Rng + ?Sized>(&mut self, noise_variance: f64, rng: &mut R) -> Result<(u64, u64)> {
        self.link.set_noise_variance(noise_variance);
        let per_packet = self.modem.frames_per_packet() * self.modem.bits_per_frame();
        let bits = random_bits(self.packets_per_block, per_packet, rng);
        let bits: Vec<u8> = bits.data().iter().map(|&b| b as u8).collect();
        let tx = self.modem.modulate(&bits)?;
        let mut rx = vec![Complex64::new(0.0, 0.0); tx.len()];
        let chunk = self.link.baseband_len();
        for (t, r) in tx.chunks_exact(chunk).zip(rx.chunks_exact_mut(chunk)) {
            self.link.transmit(t, rng, r)?;
        }
        let decided = self.modem.demodulate(&rx)?;
        let errors = bits.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64;
        Ok((bits.len() as u64, errors))
    }

    /// Channel-rate transmit waveform of `packets` random packets.
    pub fn transmit_waveform<R: Rng + ?Sized>(&mut self, packets: usize, rng: &mut R) -> Result<Vec<Complex64>> {
        let per_packet = self.modem.frames_per_packet() * self.modem.bits_per_frame();
        let mut out = Vec::with_capacity(packets * self.link.packet_len());
        for _ in 0..packets {
            let bits = random_bits(1, per_packet, rng);
            let bits: Vec<u8> = bits.data().iter().map(|&b| b as u8).collect();
            out.extend(self.link.modulate(&self.modem.modulate(&bits)?)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn ofdm_identity_channel_is_error_free_without_noise() {
        let cfg = OfdmConfig::reference();
        let ch = ChannelRealization::pure_delay(0, 2048, 2048.0, 848.0);
        let modem = Modem::ofdm(cfg, 4, &ch).unwrap();
        assert_eq!(modem.rate(), 1.125);
        let mut sim = PacketSimulator::new(modem, &ch, 2).unwrap();
        let (bits, errors) = sim.run_block(0.0, &mut stream(1, 0)).unwrap();
        assert_eq!(bits, 2 * 4 * 648);
        assert_eq!(errors, 0);
    }

    #[test]
    fn waveform_has_unit_power() {
        let cfg = OfdmConfig::reference();
        let ch = ChannelRealization::pure_delay(0, 2048, 2048.0, 848.0);
        let mut sim = PacketSimulator::new(Modem::ofdm(cfg, 4, &ch).unwrap(), &ch, 1).unwrap();
        let w = sim.transmit_waveform(2, &mut stream(2, 0)).unwrap();
        assert_eq!(w.len(), 2 * 9216);
        assert!((crate::dsp::mean_power(&w) - 1.0).abs() < 1e-12);
    }
}
