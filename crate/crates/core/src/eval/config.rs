use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ae::{AEConfig, PaprPeak};
use crate::channel::{ChannelRealization, DrillStringSpec, Segment};
use crate::dsp::WelchParams;
use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;

/// Pipe/joint geometry in the units of the usual drilling tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrillStringSection {
    pub n_pipes: usize,
    pub n_joints: usize,
    pub d_p_mm: f64,
    pub d_j_mm: f64,
    pub a_p_cm2: f64,
    pub a_j_cm2: f64,
    /// Wave speed, m/s.
    pub c: f64,
    /// Density, kg/m^3.
    pub rho: f64,
}

impl DrillStringSection {
    pub fn reference() -> Self {
        Self {
            n_pipes: 10,
            n_joints: 9,
            d_p_mm: 8760.0,
            d_j_mm: 240.0,
            a_p_cm2: 52.276,
            a_j_cm2: 248.186,
            c: 5130.0,
            rho: 7870.0,
        }
    }

    pub fn spec(&self) -> Result<DrillStringSpec> {
        DrillStringSpec::alternating(
            self.n_pipes,
            self.n_joints,
            Segment::new(self.d_p_mm / 1e3, self.a_p_cm2 / 1e4),
            Segment::new(self.d_j_mm / 1e3, self.a_j_cm2 / 1e4),
            self.c,
            self.rho,
        )
        .map_err(|e| Error::config("drillstring", e.to_string()))
    }
}

fn default_ofdm_p() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSection {
    pub nfft: usize,
    pub cp: usize,
    /// Symbols per packet.
    #[serde(default = "default_ofdm_p")]
    pub p: usize,
    /// Inclusive `[low, high]` pairs.
    pub passbands_hz: Vec<(f64, f64)>,
}

impl OfdmSection {
    pub fn reference() -> Self {
        let r = OfdmConfig::reference();
        Self {
            nfft: r.nfft,
            cp: r.cp,
            p: 4,
            passbands_hz: r.passbands,
        }
    }
}

fn default_hidden() -> [usize; 2] {
    [512, 1024]
}

fn default_lr() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub epochs: usize,
    pub minibatch_packets: usize,
    pub train_batches: usize,
    pub test_batches: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_hidden")]
    pub hidden: [usize; 2],
    #[serde(default)]
    pub papr_peak: PaprPeak,
}

/// `start:step:stop` in dB, stop inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl DbRange {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::config("ebno", format!("expected start:step:stop, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let range = Self {
            start: num(parts[0])?,
            step: num(parts[1])?,
            stop: num(parts[2])?,
        };
        range.values().map(|_| range)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::config(
                "ebno",
                format!("need step > 0 and stop >= start, got {}:{}:{}", self.start, self.step, self.stop),
            ));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub ebno_db: DbRange,
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            ebno_db: DbRange {
                start: 0.0,
                step: 1.0,
                stop: 14.0,
            },
            min_errors: 100,
            max_bits: 20_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaprSection {
    pub frames: usize,
    pub oversample: usize,
    /// CCDF thresholds.
    pub thresholds_db: DbRange,
}

impl Default for PaprSection {
    fn default() -> Self {
        Self {
            frames: 10_000,
            oversample: 4,
            thresholds_db: DbRange {
                start: 0.0,
                step: 0.05,
                stop: 15.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSection {
    pub packets: usize,
    pub segment_len: usize,
    pub overlap: f64,
}

impl Default for PsdSection {
    fn default() -> Self {
        Self {
            packets: 64,
            segment_len: 512,
            overlap: 0.5,
        }
    }
}

impl PsdSection {
    pub fn welch(&self) -> WelchParams {
        WelchParams {
            segment_len: self.segment_len,
            overlap: self.overlap,
        }
    }
}

/// Every parameter of a run, as read from one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub u: usize,
    pub l: usize,
    pub f_c: f64,
    pub f_s: f64,
    pub alpha: f64,
    pub one_over_n0_db: f64,
    pub drillstring: DrillStringSection,
    pub ofdm: OfdmSection,
    pub training: TrainingSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub papr: PaprSection,
    #[serde(default)]
    pub psd: PsdSection,
    pub seed: u64,
}

impl SimConfig {
    /// The full reference setup with the long training schedule.
    pub fn reference() -> Self {
        let ae = AEConfig::reference();
        Self {
            m: ae.m,
            n: ae.n,
            p: ae.p,
            u: ae.u,
            l: ae.l,
            f_c: ae.f_c,
            f_s: ae.f_s,
            alpha: ae.alpha,
            one_over_n0_db: ae.one_over_n0_db,
            drillstring: DrillStringSection::reference(),
            ofdm: OfdmSection::reference(),
            training: TrainingSection {
                epochs: ae.epochs,
                minibatch_packets: ae.minibatch_packets,
                train_batches: ae.train_batches,
                test_batches: ae.test_batches,
                learning_rate: ae.learning_rate,
                hidden: ae.hidden,
                papr_peak: ae.papr_peak,
            },
            sweep: SweepSection::default(),
            papr: PaprSection::default(),
            psd: PsdSection::default(),
            seed: ae.seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::config(json_path(&e), e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn hash(&self) -> String {
        crate::digest::json_hash(self)
    }

    /// Checks every section against the preconditions of the code it feeds.
    pub fn validate(&self) -> Result<()> {
        self.ae_config()
            .validate()
            .map_err(|e| Error::config("ae", e.to_string()))?;
        self.drillstring.spec()?;
        self.ofdm_config()
            .validate()
            .map_err(|e| Error::config("ofdm", e.to_string()))?;
        if self.ofdm.p == 0 {
            return Err(Error::config("ofdm.p", "must be at least 1"));
        }
        crate::dsp::CarrierMap::new(self.ofdm.nfft + self.ofdm.cp, self.u, self.f_c, self.f_s)
            .map_err(|e| Error::config("ofdm", e.to_string()))?;
        self.sweep.ebno_db.values()?;
        if self.sweep.min_errors == 0 || self.sweep.max_bits == 0 {
            return Err(Error::config("sweep", "min_errors and max_bits must be positive"));
        }
        if self.papr.frames == 0 || self.papr.oversample == 0 {
            return Err(Error::config("papr", "frames and oversample must be positive"));
        }
        self.papr.thresholds_db.values().map_err(|e| Error::config("papr.thresholds_db", e.to_string()))?;
        if self.psd.packets == 0 || self.psd.segment_len == 0 || !(0.0..1.0).contains(&self.psd.overlap) {
            return Err(Error::config("psd", "need packets > 0, segment_len > 0 and overlap in [0, 1)"));
        }
        Ok(())
    }

    pub fn ae_config(&self) -> AEConfig {
        AEConfig {
            m: self.m,
            n: self.n,
            p: self.p,
            u: self.u,
            l: self.l,
            f_c: self.f_c,
            f_s: self.f_s,
            alpha: self.alpha,
            one_over_n0_db: self.one_over_n0_db,
            epochs: self.training.epochs,
            minibatch_packets: self.training.minibatch_packets,
            train_batches: self.training.train_batches,
            test_batches: self.training.test_batches,
            learning_rate: self.training.learning_rate,
            hidden: self.training.hidden,
            papr_peak: self.training.papr_peak,
            seed: self.seed,
        }
    }

    pub fn ofdm_config(&self) -> OfdmConfig {
        OfdmConfig {
            nfft: self.ofdm.nfft,
            cp: self.ofdm.cp,
            passbands: self.ofdm.passbands_hz.clone(),
            f_c: self.f_c,
            f_s: self.f_s,
            u: self.u,
        }
    }

    pub fn channel(&self) -> Result<ChannelRealization> {
        ChannelRealization::synthesize(&self.drillstring.spec()?, self.f_s, self.l, self.f_c)
    }

    /// Identifies the simulated channel: geometry, rate and length.
    pub fn channel_tag(&self) -> String {
        crate::digest::json_hash(&(&self.drillstring, self.f_s, self.l))
    }
}

fn json_path(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}
