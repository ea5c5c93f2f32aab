use num_complex::Complex64;
use rustfft::FftPlanner;

use super::fourier::UnitaryDft;
use super::BasebandFrame;
use crate::error::{Error, Result};

/// Placement of an `n`-bin baseband spectrum inside a `u*n`-bin channel-rate
/// spectrum, starting at bin `k0 = f_c * u * n / f_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CarrierMap {
    pub n: usize,
    pub u: usize,
    pub k0: usize,
}

impl CarrierMap {
    pub fn new(n: usize, u: usize, carrier_hz: f64, sample_rate: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "frame length must be positive"));
        }
        if u == 0 {
            return Err(Error::invalid("u", "upsampling factor must be positive"));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::invalid("f_s", "sample rate must be positive"));
        }
        let exact = carrier_hz * (u * n) as f64 / sample_rate;
        let k0 = exact.round();
        if (exact - k0).abs() > 1e-9 || k0 < 0.0 {
            return Err(Error::FractionalCarrier(exact));
        }
        let k0 = k0 as usize;
        if k0 + n > u * n {
            return Err(Error::invalid(
                "f_c",
                format!("band [{k0}, {}) exceeds the {} channel-rate bins", k0 + n, u * n),
            ));
        }
        Ok(Self { n, u, k0 })
    }

    pub fn passband_len(&self) -> usize {
        self.n * self.u
    }
}

/// Frame-by-frame DFT-domain upconversion and its inverse, with reusable
/// plans and buffers.
#[derive(Clone, Debug)]
pub struct Resampler {
    map: CarrierMap,
    base: UnitaryDft,
    pass: UnitaryDft,
    buf_base: Vec<Complex64>,
    buf_pass: Vec<Complex64>,
}

impl Resampler {
    pub fn new(map: CarrierMap) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            base: UnitaryDft::with_planner(map.n, &mut planner),
            pass: UnitaryDft::with_planner(map.passband_len(), &mut planner),
            buf_base: vec![Complex64::new(0.0, 0.0); map.n],
            buf_pass: vec![Complex64::new(0.0, 0.0); map.passband_len()],
            map,
        }
    }

    pub fn map(&self) -> CarrierMap {
        self.map
    }

    /// Upsample by `u` and shift to the carrier, preserving mean power.
    pub fn to_passband(&mut self, frame: &[Complex64], out: &mut [Complex64]) {
        let CarrierMap { n, u, k0 } = self.map;
        assert_eq!(frame.len(), n, "baseband frame length");
        assert_eq!(out.len(), n * u, "passband frame length");
        self.buf_base.copy_from_slice(frame);
        self.base.forward(&mut self.buf_base);
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        out[k0..k0 + n].copy_from_slice(&self.buf_base);
        self.pass.inverse(out);
        let gain = (u as f64).sqrt();
        out.iter_mut().for_each(|v| *v *= gain);
    }

    /// Extract the carrier band and return to the baseband rate.
    pub fn to_baseband(&mut self, passband: &[Complex64], out: &mut [Complex64]) {
        let CarrierMap { n, u, k0 } = self.map;
        assert_eq!(passband.len(), n * u, "passband frame length");
        assert_eq!(out.len(), n, "baseband frame length");
        self.buf_pass.copy_from_slice(passband);
        self.pass.forward(&mut self.buf_pass);
        out.copy_from_slice(&self.buf_pass[k0..k0 + n]);
        self.base.inverse(out);
        let gain = 1.0 / (u as f64).sqrt();
        out.iter_mut().for_each(|v| *v *= gain);
    }

    /// Adjoint of [`Resampler::to_passband`]; equals `u` times `to_baseband`.
    pub fn to_passband_adjoint(&mut self, grad: &[Complex64], out: &mut [Complex64]) {
        self.to_baseband(grad, out);
        let u = self.map.u as f64;
        out.iter_mut().for_each(|v| *v *= u);
    }

    /// Adjoint of [`Resampler::to_baseband`]; equals `to_passband / u`.
    pub fn to_baseband_adjoint(&mut self, grad: &[Complex64], out: &mut [Complex64]) {
        self.to_passband(grad, out);
        let inv_u = 1.0 / self.map.u as f64;
        out.iter_mut().for_each(|v| *v *= inv_u);
    }
}

pub fn frame_to_passband(
    frame: &BasebandFrame,
    u: usize,
    carrier_hz: f64,
    sample_rate: f64,
) -> Result<Vec<Complex64>> {
    let map = CarrierMap::new(frame.len(), u, carrier_hz, sample_rate)?;
    let mut out = vec![Complex64::new(0.0, 0.0); map.passband_len()];
    Resampler::new(map).to_passband(frame.samples(), &mut out);
    Ok(out)
}

pub fn passband_to_frame(
    samples: &[Complex64],
    u: usize,
    carrier_hz: f64,
    sample_rate: f64,
) -> Result<BasebandFrame> {
    if u == 0 || samples.is_empty() || samples.len() % u != 0 {
        return Err(Error::Shape {
            context: "passband frame (multiple of u)",
            expected: u * (samples.len() / u.max(1)).max(1),
            actual: samples.len(),
        });
    }
    let map = CarrierMap::new(samples.len() / u, u, carrier_hz, sample_rate)?;
    let mut out = vec![Complex64::new(0.0, 0.0); map.n];
    Resampler::new(map).to_baseband(samples, &mut out);
    Ok(BasebandFrame(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::mean_power;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    }

    #[test]
    fn carrier_bin_for_both_configs() {
        assert_eq!(CarrierMap::new(64, 4, 848.0, 2048.0).unwrap().k0, 106);
        assert_eq!(CarrierMap::new(576, 4, 848.0, 2048.0).unwrap().k0, 954);
    }

    #[test]
    fn fractional_carrier_rejected() {
        match CarrierMap::new(64, 4, 850.0, 2048.0) {
            Err(Error::FractionalCarrier(v)) => assert!((v - 106.25).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_frame_keeps_unit_power() {
        let frame = BasebandFrame(vec![Complex64::new(1.0, 0.0); 4]);
        let y = frame_to_passband(&frame, 2, 0.0, 8.0).unwrap();
        assert_eq!(y.len(), 8);
        assert!((mean_power(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_in_zero_out() {
        let y = vec![Complex64::new(0.0, 0.0); 256];
        let f = passband_to_frame(&y, 4, 848.0, 2048.0).unwrap();
        assert!(f.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn occupies_expected_bins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = BasebandFrame(random_frame(64, &mut rng));
        let mut y = frame_to_passband(&frame, 4, 848.0, 2048.0).unwrap();
        UnitaryDft::new(256).forward(&mut y);
        for (bin, v) in y.iter().enumerate() {
            if (106..170).contains(&bin) {
                assert!(v.norm() > 1e-9, "bin {bin} empty");
            } else {
                assert!(v.norm() < 1e-12, "bin {bin} leaked {v}");
            }
        }
        // bin spacing 2048/256 = 8 Hz: 106*8 = 848, 169*8 = 1352 (covers up to 1360)
        assert_eq!(106 * 8, 848);
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let map = CarrierMap::new(64, 4, 848.0, 2048.0).unwrap();
        let mut rs = Resampler::new(map);
        let x = random_frame(64, &mut rng);
        let y = random_frame(256, &mut rng);
        let mut ax = vec![Complex64::new(0.0, 0.0); 256];
        rs.to_passband(&x, &mut ax);
        let mut aty = vec![Complex64::new(0.0, 0.0); 64];
        rs.to_passband_adjoint(&y, &mut aty);
        assert!((inner(&ax, &y) - inner(&x, &aty)).norm() < 1e-10);

        let mut by = vec![Complex64::new(0.0, 0.0); 64];
        rs.to_baseband(&y, &mut by);
        let mut btx = vec![Complex64::new(0.0, 0.0); 256];
        rs.to_baseband_adjoint(&x, &mut btx);
        assert!((inner(&by, &x) - inner(&y, &btx)).norm() < 1e-10);
    }

    #[test]
    fn length_mismatch_rejected() {
        let y = vec![Complex64::new(0.0, 0.0); 255];
        assert!(passband_to_frame(&y, 4, 848.0, 2048.0).is_err());
    }
}
