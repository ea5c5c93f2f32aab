use serde::{Deserialize, Serialize};

use crate::dsp::CarrierMap;
use crate::error::{Error, Result};

/// How the PAPR loss term takes the peak.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PaprPeak {
    /// Exact maximum with the subgradient on the peak sample.
    #[default]
    Max,
    /// Log-sum-exp soft maximum of the normalized sample powers.
    Smooth { temperature: f64 },
}

fn default_hidden() -> [usize; 2] {
    [512, 1024]
}

fn default_learning_rate() -> f64 {
    1e-3
}

/// Frame geometry, loss weighting and training schedule of the autoencoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AEConfig {
    /// Bits per frame.
    pub m: usize,
    /// Complex samples per frame.
    pub n: usize,
    /// Frames per packet.
    pub p: usize,
    pub u: usize,
    /// Channel impulse-response length.
    pub l: usize,
    pub f_c: f64,
    pub f_s: f64,
    pub alpha: f64,
    /// Training SNR `1/N_0` in dB.
    pub one_over_n0_db: f64,
    pub epochs: usize,
    pub minibatch_packets: usize,
    pub train_batches: usize,
    pub test_batches: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    /// Widths of the two hidden layers, encoder order (the decoder mirrors them).
    #[serde(default = "default_hidden")]
    pub hidden: [usize; 2],
    #[serde(default)]
    pub papr_peak: PaprPeak,
    pub seed: u64,
}

impl AEConfig {
    /// Frame geometry of the reference system with the full training schedule.
    pub fn reference() -> Self {
        Self {
            m: 72,
            n: 64,
            p: 36,
            u: 4,
            l: 2048,
            f_c: 848.0,
            f_s: 2048.0,
            alpha: 0.0,
            one_over_n0_db: 3.0,
            epochs: 256,
            minibatch_packets: 128,
            train_batches: 192,
            test_batches: 64,
            learning_rate: 1e-3,
            hidden: default_hidden(),
            papr_peak: PaprPeak::Max,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("n", self.n),
            ("p", self.p),
            ("u", self.u),
            ("l", self.l),
            ("minibatch_packets", self.minibatch_packets),
            ("hidden[0]", self.hidden[0]),
            ("hidden[1]", self.hidden[1]),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        if self.minibatch_packets * self.p < 2 {
            return Err(Error::invalid(
                "minibatch_packets",
                "a minibatch needs at least two frames for batch normalization",
            ));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", format!("must be non-negative, got {}", self.alpha)));
        }
        if !self.one_over_n0_db.is_finite() {
            return Err(Error::invalid("one_over_n0_db", "must be finite"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate", "must be positive"));
        }
        if let PaprPeak::Smooth { temperature } = self.papr_peak {
            if !(temperature > 0.0) {
                return Err(Error::invalid("papr_peak.temperature", "must be positive"));
            }
        }
        self.carrier_map()?;
        Ok(())
    }

    pub fn carrier_map(&self) -> Result<CarrierMap> {
        CarrierMap::new(self.n, self.u, self.f_c, self.f_s)
    }

    /// Bits per baseband sample, `m / n`.
    pub fn rate(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// Information throughput at the baseband rate `f_s / u`.
    pub fn bits_per_second(&self) -> f64 {
        self.rate() * self.f_s / self.u as f64
    }

    pub fn packet_len(&self) -> usize {
        self.p * self.u * self.n
    }

    pub fn frame_duration_s(&self) -> f64 {
        (self.n * self.u) as f64 / self.f_s
    }

    /// Channel-rate noise variance used in training. With unit frame power
    /// `r E_b = 1`, so the baseband variance is `N_0` itself.
    pub fn training_noise_variance(&self) -> f64 {
        self.u as f64 * 10f64.powf(-self.one_over_n0_db / 10.0)
    }

    pub fn frames_per_minibatch(&self) -> usize {
        self.minibatch_packets * self.p
    }

    pub fn hash(&self) -> String {
        crate::digest::json_hash(self)
    }
}

#[cfg(test)]
pub(crate) fn tiny_config() -> AEConfig {
    AEConfig {
        m: 6,
        n: 4,
        p: 2,
        u: 2,
        l: 8,
        f_c: 0.0,
        f_s: 16.0,
        alpha: 0.0,
        one_over_n0_db: 3.0,
        epochs: 2,
        minibatch_packets: 4,
        train_batches: 3,
        test_batches: 1,
        learning_rate: 1e-2,
        hidden: [8, 12],
        papr_peak: PaprPeak::Max,
        seed: 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_bookkeeping() {
        let c = AEConfig::reference();
        c.validate().unwrap();
        assert_eq!(c.rate(), 1.125);
        assert_eq!(c.bits_per_second(), 576.0);
        assert_eq!(c.packet_len(), 9216);
        assert_eq!(c.carrier_map().unwrap().k0, 106);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = AEConfig::reference();
        c.alpha = -1.0;
        assert!(c.validate().is_err());
        let mut c = AEConfig::reference();
        c.f_c = 850.0;
        assert!(matches!(c.validate(), Err(Error::FractionalCarrier(_))));
        let mut c = AEConfig::reference();
        c.m = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn training_noise_is_n0_at_baseband() {
        let c = AEConfig::reference();
        let baseband = c.training_noise_variance() / c.u as f64;
        assert!((baseband - 10f64.powf(-0.3)).abs() < 1e-15);
    }
}
