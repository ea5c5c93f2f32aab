use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::dsp::{complex_to_pairs, CarrierMap, PacketLink};
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// The packet link as a differentiable layer over frame tensors.
///
/// Consecutive groups of `p` rows form one packet.
#[derive(Clone)]
pub struct ChannelLayer {
    link: PacketLink,
    tx: Vec<Complex64>,
    rx: Vec<Complex64>,
}

impl ChannelLayer {
    pub fn new(map: CarrierMap, frames_per_packet: usize, impulse: &[Complex64], noise_variance: f64) -> Result<Self> {
        let link = PacketLink::new(map, frames_per_packet, impulse, noise_variance)?;
        let len = link.baseband_len();
        Ok(Self {
            link,
            tx: vec![Complex64::new(0.0, 0.0); len],
            rx: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_realization(
        map: CarrierMap,
        frames_per_packet: usize,
        channel: &ChannelRealization,
        noise_variance: f64,
    ) -> Result<Self> {
        Self::new(map, frames_per_packet, &channel.impulse, noise_variance)
    }

    pub fn link_mut(&mut self) -> &mut PacketLink {
        &mut self.link
    }

    pub fn set_noise_variance(&mut self, variance: f64) {
        self.link.set_noise_variance(variance);
    }

    fn check(&self, t: &Tensor) -> Result<()> {
        let n = self.link.map().n;
        let p = self.link.frames_per_packet();
        if t.cols() != 2 * n || t.rows() % p != 0 {
            return Err(Error::Shape {
                context: "frame tensor (whole packets of width 2n)",
                expected: (t.rows() / p).max(1) * p * 2 * n,
                actual: t.data().len(),
            });
        }
        Ok(())
    }

    fn load(&mut self, rows: &[f64]) {
        for (v, pair) in self.tx.iter_mut().zip(rows.chunks_exact(2)) {
            *v = Complex64::new(pair[0], pair[1]);
        }
    }

    pub fn forward<R: Rng + ?Sized>(&mut self, frames: &Tensor, rng: &mut R) -> Result<Tensor> {
        self.check(frames)?;
        let chunk = 2 * self.link.baseband_len();
        let mut out = Tensor::zeros(frames.rows(), frames.cols());
        for (src, dst) in frames.data().chunks_exact(chunk).zip(out.data_mut().chunks_exact_mut(chunk)) {
            self.load(src);
            self.link.transmit(&self.tx, rng, &mut self.rx)?;
            complex_to_pairs(&self.rx, dst);
        }
        Ok(out)
    }

    /// Gradient at the transmitted frames given the gradient at the received ones.
    pub fn backward(&mut self, grad: &Tensor) -> Result<Tensor> {
        self.check(grad)?;
        let chunk = 2 * self.link.baseband_len();
        let mut out = Tensor::zeros(grad.rows(), grad.cols());
        for (src, dst) in grad.data().chunks_exact(chunk).zip(out.data_mut().chunks_exact_mut(chunk)) {
            self.load(src);
            self.link.adjoint(&self.tx, &mut self.rx)?;
            complex_to_pairs(&self.rx, dst);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{central_difference, relative_error};
    use crate::rng::stream;

    #[test]
    fn backward_matches_finite_differences() {
        let map = CarrierMap::new(4, 2, 4.0, 16.0).unwrap();
        let h: Vec<Complex64> = (0..5).map(|i| Complex64::new((i as f64).cos(), 0.3 * i as f64)).collect();
        let mut layer = ChannelLayer::new(map, 2, &h, 0.0).unwrap();
        let x = Tensor::from_vec(4, 8, (0..32).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let w: Vec<f64> = (0..32).map(|i| (i as f64 * 1.1).cos()).collect();
        let mut rng = stream(0, 0);
        let mut objective = |v: &[f64]| {
            let t = Tensor::from_vec(4, 8, v.to_vec()).unwrap();
            let y = layer.forward(&t, &mut rng).unwrap();
            y.data().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
        };
        let numeric = central_difference(&mut objective, x.data(), 1e-6);
        let mut layer = ChannelLayer::new(map, 2, &h, 0.0).unwrap();
        let analytic = layer.backward(&Tensor::from_vec(4, 8, w.clone()).unwrap()).unwrap();
        assert!(relative_error(analytic.data(), &numeric) < 1e-8);
    }

    #[test]
    fn partial_packet_rejected() {
        let map = CarrierMap::new(4, 2, 0.0, 16.0).unwrap();
        let mut layer = ChannelLayer::new(map, 2, &[Complex64::new(1.0, 0.0)], 0.0).unwrap();
        assert!(layer.forward(&Tensor::zeros(3, 8), &mut stream(0, 0)).is_err());
    }
}
