use std::fmt::Write as _;
use std::time::Instant;

use super::channel_layer::ChannelLayer;
use super::config::AEConfig;
use super::loss::{CompositeLoss, LossBreakdown};
use super::model::AEModel;
use crate::channel::ChannelRealization;
use crate::dsp::DEFAULT_OVERSAMPLE;
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, AdamState, Mode, Tensor};
use crate::rng::{random_bits, stream, STREAM_INIT, STREAM_TEST, STREAM_TRAIN_BITS, STREAM_TRAIN_NOISE};

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean train-mode objective over the epoch's minibatches.
    pub train_loss: f64,
    pub test: LossBreakdown,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub seed: u64,
    pub config_hash: String,
    /// Test loss of the freshly initialized model.
    pub initial_test: LossBreakdown,
    pub epochs: Vec<EpochRecord>,
}

impl TrainReport {
    pub fn final_test(&self) -> LossBreakdown {
        self.epochs.last().map_or(self.initial_test, |e| e.test)
    }

    /// One row per epoch plus an epoch-0 row for the initial model.
    /// Timings are left out so equal seeds give identical files.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# config_hash: {}\n# seed: {}\n", self.config_hash, self.seed);
        out.push_str("epoch,train_loss,test_loss,bce,papr_term\n");
        let t = &self.initial_test;
        let _ = writeln!(out, "0,,{:.17e},{:.17e},{:.17e}", t.total, t.bce, t.papr);
        for e in &self.epochs {
            let _ = writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{:.17e}",
                e.epoch, e.train_loss, e.test.total, e.test.bce, e.test.papr
            );
        }
        out
    }
}

/// Trains a fresh model on a fixed channel realization.
pub fn train(config: &AEConfig, channel: &ChannelRealization) -> Result<(AEModel, TrainReport)> {
    train_with_progress(config, channel, |_| {})
}

pub fn train_with_progress(
    config: &AEConfig,
    channel: &ChannelRealization,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<(AEModel, TrainReport)> {
    config.validate()?;
    if channel.len() != config.l {
        return Err(Error::Shape {
            context: "impulse response length (l)",
            expected: config.l,
            actual: channel.len(),
        });
    }
    let mut model = AEModel::new(config.clone(), &mut stream(config.seed, STREAM_INIT))?;
    let mut trainer = Trainer::new(config, channel)?;
    let initial_test = trainer.test_loss(&model)?;
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let start = Instant::now();
        let train_loss = trainer.run_epoch(&mut model, epoch)?;
        let test = trainer.test_loss(&model)?;
        let record = EpochRecord {
            epoch,
            train_loss,
            test,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        progress(&record);
        epochs.push(record);
    }
    let report = TrainReport {
        seed: config.seed,
        config_hash: config.hash(),
        initial_test,
        epochs,
    };
    Ok((model, report))
}

struct Trainer {
    config: AEConfig,
    layer: ChannelLayer,
    loss: CompositeLoss,
    adam: Option<AdamState>,
    noise: rand_chacha::ChaCha8Rng,
}

impl Trainer {
    fn new(config: &AEConfig, channel: &ChannelRealization) -> Result<Self> {
        let layer = ChannelLayer::from_realization(
            config.carrier_map()?,
            config.p,
            channel,
            config.training_noise_variance(),
        )?;
        Ok(Self {
            config: config.clone(),
            layer,
            loss: CompositeLoss::new(config.n, DEFAULT_OVERSAMPLE, config.alpha, config.papr_peak),
            adam: None,
            noise: stream(config.seed, STREAM_TRAIN_NOISE),
        })
    }

    /// One pass over the training set. The bit stream restarts every epoch,
    /// so each epoch sees the same bits under fresh noise.
    fn run_epoch(&mut self, model: &mut AEModel, epoch: usize) -> Result<f64> {
        let rows = self.config.frames_per_minibatch();
        let mut bits_rng = stream(self.config.seed, STREAM_TRAIN_BITS);
        let mut sum = 0.0;
        for step in 0..self.config.train_batches {
            let bits = random_bits(rows, self.config.m, &mut bits_rng);
            let total = self.step(model, &bits).map_err(|e| match e {
                Error::Divergence { .. } => Error::Divergence { epoch, step },
                other => other,
            })?;
            sum += total;
        }
        Ok(sum / self.config.train_batches.max(1) as f64)
    }

    fn step(&mut self, model: &mut AEModel, bits: &Tensor) -> Result<f64> {
        let (frames, enc_tape) = model.encode_with_tape(bits, Mode::Train)?;
        let received = self.layer.forward(&frames, &mut self.noise)?;
        let (probs, dec_tape) = model.decode_with_tape(&received, Mode::Train)?;
        let (loss, grads) = self.loss.evaluate_with_grads(bits, &probs, &frames)?;
        if !loss.total.is_finite() {
            return Err(Error::Divergence { epoch: 0, step: 0 });
        }
        let (grad_received, mut all_grads) = model.decode_backward(&dec_tape, &grads.probs)?;
        let mut grad_frames = self.layer.backward(&grad_received)?;
        for (g, extra) in grad_frames.data_mut().iter_mut().zip(grads.frames.data()) {
            *g += extra;
        }
        let enc_grads = model.encode_backward(&enc_tape, &grad_frames)?;
        all_grads.splice(0..0, enc_grads);
        if all_grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::Divergence { epoch: 0, step: 0 });
        }

        let adam = self.adam.get_or_insert_with(|| {
            let mut sizes = model.encoder.parameter_sizes();
            sizes.extend(model.decoder.parameter_sizes());
            AdamState::new(
                AdamConfig {
                    learning_rate: self.config.learning_rate,
                    ..AdamConfig::default()
                },
                &sizes,
            )
        });
        let mut params = model.encoder.parameters_mut();
        params.extend(model.decoder.parameters_mut());
        adam.step(&mut params, &all_grads)?;
        model.encoder.commit_batch_stats(&enc_tape.tape);
        model.decoder.commit_batch_stats(&dec_tape);
        Ok(loss.total)
    }

    /// Loss on the fixed test set, inference mode throughout. Both the bits
    /// and the noise come from a stream restarted on every call.
    fn test_loss(&mut self, model: &AEModel) -> Result<LossBreakdown> {
        let mut rng = stream(self.config.seed, STREAM_TEST);
        let rows = self.config.frames_per_minibatch();
        let batches = self.config.test_batches.max(1);
        let mut acc = LossBreakdown::default();
        for _ in 0..batches {
            let bits = random_bits(rows, self.config.m, &mut rng);
            let frames = model.encode(&bits)?;
            let received = self.layer.forward(&frames, &mut rng)?;
            let probs = model.decode(&received)?;
            let l = self.loss.evaluate(&bits, &probs, &frames)?;
            acc.total += l.total;
            acc.bce += l.bce;
            acc.papr += l.papr;
        }
        let k = batches as f64;
        Ok(LossBreakdown {
            total: acc.total / k,
            bce: acc.bce / k,
            papr: acc.papr / k,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ae::config::tiny_config;

    fn tiny_channel(cfg: &AEConfig) -> ChannelRealization {
        let mut h = vec![num_complex::Complex64::new(0.0, 0.0); cfg.l];
        h[0] = num_complex::Complex64::new(1.0, 0.0);
        h[1] = num_complex::Complex64::new(0.3, -0.2);
        ChannelRealization::from_impulse(h, cfg.f_s, cfg.f_c)
    }

    #[test]
    fn training_is_deterministic_and_reports_every_epoch() {
        let cfg = tiny_config();
        let ch = tiny_channel(&cfg);
        let (m1, r1) = train(&cfg, &ch).unwrap();
        let (m2, r2) = train(&cfg, &ch).unwrap();
        assert_eq!(r1.epochs.len(), cfg.epochs);
        assert_eq!(r1.to_csv(), r2.to_csv());
        assert_eq!(m1, m2);
        assert!(r1.to_csv().starts_with("# config_hash: "));
    }

    #[test]
    fn loss_decreases_on_an_easy_link() {
        let cfg = AEConfig {
            epochs: 30,
            train_batches: 8,
            one_over_n0_db: 15.0,
            ..tiny_config()
        };
        let (_, report) = train(&cfg, &tiny_channel(&cfg)).unwrap();
        let first = report.initial_test.bce;
        let last = report.final_test().bce;
        assert!(last < 0.5 * first, "{first} -> {last}");
    }

    #[test]
    fn wrong_impulse_length_rejected() {
        let cfg = tiny_config();
        let ch = ChannelRealization::pure_delay(0, 3, cfg.f_s, cfg.f_c);
        assert!(train(&cfg, &ch).is_err());
    }
}
