use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::AEConfig;
use crate::error::{Error, Result};
use crate::nn::{BatchNorm, Dense, Layer, Mode, Sequential, Tape, Tensor};

pub const MODEL_FORMAT: &str = "dsac-ae-model";
pub const MODEL_VERSION: u32 = 1;

/// Encoder and decoder of the autoencoder modem.
///
/// Frames travel as tensors of shape `(frames, 2n)` holding interleaved
/// `(re, im)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct AEModel {
    pub config: AEConfig,
    pub encoder: Sequential,
    pub decoder: Sequential,
    /// Identifies the channel the model was trained on, if known.
    pub channel_tag: Option<String>,
}

/// Intermediates of a differentiable encoder pass.
pub struct EncodeTape {
    pub(crate) tape: Tape,
    normalized: Tensor,
    scales: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    config_hash: String,
    seed: u64,
    channel_tag: Option<String>,
    config: AEConfig,
    encoder: Sequential,
    decoder: Sequential,
}

impl AEModel {
    pub fn new<R: Rng + ?Sized>(config: AEConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let [h1, h2] = config.hidden;
        let width = 2 * config.n;
        let encoder = Sequential::new(vec![
            Layer::Dense(Dense::glorot(config.m, h1, rng)),
            Layer::Relu,
            Layer::BatchNorm(BatchNorm::new(h1)),
            Layer::Dense(Dense::glorot(h1, h2, rng)),
            Layer::Relu,
            Layer::BatchNorm(BatchNorm::new(h2)),
            Layer::Dense(Dense::glorot(h2, width, rng)),
        ]);
        let decoder = Sequential::new(vec![
            Layer::Dense(Dense::glorot(width, h2, rng)),
            Layer::Relu,
            Layer::BatchNorm(BatchNorm::new(h2)),
            Layer::Dense(Dense::glorot(h2, h1, rng)),
            Layer::Relu,
            Layer::BatchNorm(BatchNorm::new(h1)),
            Layer::Dense(Dense::glorot(h1, config.m, rng)),
            Layer::Sigmoid,
        ]);
        Ok(Self {
            config,
            encoder,
            decoder,
            channel_tag: None,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.encoder.parameter_count() + self.decoder.parameter_count()
    }

    fn check_bits(&self, bits: &Tensor) -> Result<()> {
        if bits.cols() != self.config.m {
            return Err(Error::Shape {
                context: "bits per frame (m)",
                expected: self.config.m,
                actual: bits.cols(),
            });
        }
        if let Some(bad) = bits.data().iter().find(|&&b| b != 0.0 && b != 1.0) {
            return Err(Error::invalid("bits", format!("entries must be 0 or 1, found {bad}")));
        }
        Ok(())
    }

    fn check_frames(&self, frames: &Tensor) -> Result<()> {
        if frames.cols() != 2 * self.config.n {
            return Err(Error::Shape {
                context: "frame width (2n)",
                expected: 2 * self.config.n,
                actual: frames.cols(),
            });
        }
        Ok(())
    }

    /// Bits to unit-power frames, inference mode.
    pub fn encode(&self, bits: &Tensor) -> Result<Tensor> {
        self.check_bits(bits)?;
        let raw = self.encoder.infer(bits)?;
        Ok(normalize_power(&raw, self.config.n).0)
    }

    pub fn encode_with_tape(&self, bits: &Tensor, mode: Mode) -> Result<(Tensor, EncodeTape)> {
        self.check_bits(bits)?;
        let (raw, tape) = self.encoder.forward(bits, mode)?;
        let (normalized, scales) = normalize_power(&raw, self.config.n);
        Ok((
            normalized.clone(),
            EncodeTape {
                tape,
                normalized,
                scales,
            },
        ))
    }

    /// Parameter gradients of the encoder given the gradient at its
    /// normalized output.
    pub fn encode_backward(&self, tape: &EncodeTape, grad: &Tensor) -> Result<Vec<Vec<f64>>> {
        let raw_grad = normalize_power_backward(&tape.normalized, &tape.scales, grad, self.config.n);
        Ok(self.encoder.backward(&tape.tape, &raw_grad)?.1)
    }

    /// Received frames to bit probabilities, inference mode.
    pub fn decode(&self, frames: &Tensor) -> Result<Tensor> {
        self.check_frames(frames)?;
        self.decoder.infer(frames)
    }

    pub fn decode_with_tape(&self, frames: &Tensor, mode: Mode) -> Result<(Tensor, Tape)> {
        self.check_frames(frames)?;
        self.decoder.forward(frames, mode)
    }

    /// Input gradient and parameter gradients of the decoder.
    pub fn decode_backward(&self, tape: &Tape, grad: &Tensor) -> Result<(Tensor, Vec<Vec<f64>>)> {
        self.decoder.backward(tape, grad)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            config_hash: self.config.hash(),
            seed: self.config.seed,
            channel_tag: self.channel_tag.clone(),
            config: self.config.clone(),
            encoder: self.encoder.clone(),
            decoder: self.decoder.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::ModelMismatch(format!(
                "unsupported model format {} v{}",
                doc.format, doc.version
            )));
        }
        if doc.config_hash != doc.config.hash() {
            return Err(Error::ModelMismatch("stored config hash does not match the stored config".into()));
        }
        doc.config.validate()?;
        let model = Self {
            config: doc.config,
            encoder: doc.encoder,
            decoder: doc.decoder,
            channel_tag: doc.channel_tag,
        };
        let width = 2 * model.config.n;
        let shapes_ok = model.encoder.input_width() == Some(model.config.m)
            && model.encoder.output_width() == Some(width)
            && model.decoder.input_width() == Some(width)
            && model.decoder.output_width() == Some(model.config.m);
        if !shapes_ok {
            return Err(Error::ModelMismatch("layer shapes disagree with the stored config".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Scales each row so its `n` complex samples have unit mean power.
/// Returns the normalized rows and the scale applied to each.
pub fn normalize_power(raw: &Tensor, n: usize) -> (Tensor, Vec<f64>) {
    let mut out = raw.clone();
    let mut scales = Vec::with_capacity(raw.rows());
    for i in 0..raw.rows() {
        let row = out.row_mut(i);
        let energy: f64 = row.iter().map(|v| v * v).sum();
        let scale = if energy > 0.0 { (n as f64 / energy).sqrt() } else { 0.0 };
        row.iter_mut().for_each(|v| *v *= scale);
        scales.push(scale);
    }
    (out, scales)
}

/// Backward pass of [`normalize_power`]: with `y = s z` and `s = sqrt(n/|z|^2)`,
/// `dL/dz = s (g - y (y.g) / n)`.
pub fn normalize_power_backward(normalized: &Tensor, scales: &[f64], grad: &Tensor, n: usize) -> Tensor {
    let mut out = grad.clone();
    for (i, &scale) in scales.iter().enumerate() {
        let y = normalized.row(i);
        let dot: f64 = y.iter().zip(grad.row(i)).map(|(a, b)| a * b).sum();
        let k = dot / n as f64;
        for (o, &yv) in out.row_mut(i).iter_mut().zip(y) {
            *o = scale * (*o - yv * k);
        }
    }
    out
}

/// Hard decisions at 0.5.
pub fn hard_decisions(probs: &Tensor) -> Vec<u8> {
    probs.data().iter().map(|&p| u8::from(p > 0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{central_difference, relative_error};
    use crate::ae::config::tiny_config;
    use crate::rng::{random_bits, stream};

    #[test]
    fn frames_have_unit_power() {
        let cfg = AEConfig {
            hidden: [32, 48],
            ..AEConfig::reference()
        };
        let mut rng = stream(3, 0);
        let model = AEModel::new(cfg, &mut rng).unwrap();
        let bits = random_bits(10, 72, &mut rng);
        let frames = model.encode(&bits).unwrap();
        assert_eq!((frames.rows(), frames.cols()), (10, 128));
        for i in 0..10 {
            let p = frames.row(i).iter().map(|v| v * v).sum::<f64>() / 64.0;
            assert!((p - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn non_binary_bits_rejected() {
        let model = AEModel::new(tiny_config(), &mut stream(1, 0)).unwrap();
        let bits = Tensor::from_vec(1, 6, vec![0.0, 1.0, 0.5, 0.0, 1.0, 0.0]).unwrap();
        assert!(model.encode(&bits).is_err());
        assert!(model.encode(&Tensor::zeros(1, 5)).is_err());
    }

    #[test]
    fn normalization_gradient() {
        let n = 3;
        let raw = Tensor::from_vec(2, 6, vec![0.3, -1.2, 0.7, 0.1, 2.0, -0.4, 1.0, 1.0, -0.5, 0.2, 0.0, 0.9]).unwrap();
        let weights: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let objective = |x: &[f64]| {
            let t = Tensor::from_vec(2, 6, x.to_vec()).unwrap();
            let (y, _) = normalize_power(&t, n);
            y.data().iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>()
        };
        let numeric = central_difference(objective, raw.data(), 1e-6);
        let (y, scales) = normalize_power(&raw, n);
        let g = Tensor::from_vec(2, 6, weights.clone()).unwrap();
        let analytic = normalize_power_backward(&y, &scales, &g, n);
        assert!(relative_error(analytic.data(), &numeric) < 1e-8);
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let model = AEModel::new(tiny_config(), &mut stream(2, 0)).unwrap();
        let text = model.to_json().unwrap();
        let back = AEModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        let tampered = text.replacen("\"alpha\":0.0", "\"alpha\":0.5", 1);
        assert_ne!(tampered, text);
        assert!(matches!(AEModel::from_json(&tampered), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn hard_decision_threshold() {
        let p = Tensor::from_vec(1, 3, vec![0.2, 0.5, 0.51]).unwrap();
        assert_eq!(hard_decisions(&p), vec![0, 0, 1]);
    }
}
