use num_complex::Complex64;

use super::config::PaprPeak;
use crate::dsp::{complex_to_pairs, pairs_to_complex, papr_with_grad, smooth_papr_with_grad, Oversampler};
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    /// `bce + alpha * peak term`, the minimized objective.
    pub total: f64,
    pub bce: f64,
    /// Mean linear PAPR of the transmitted frames (exact peak).
    pub papr: f64,
}

fn check_same(bits: &Tensor, probs: &Tensor) -> Result<()> {
    if bits.rows() != probs.rows() || bits.cols() != probs.cols() {
        return Err(Error::Shape {
            context: "bit and probability tensors",
            expected: bits.data().len(),
            actual: probs.data().len(),
        });
    }
    Ok(())
}

/// Mean binary cross-entropy in nats.
pub fn binary_cross_entropy(bits: &Tensor, probs: &Tensor) -> Result<f64> {
    check_same(bits, probs)?;
    let count = bits.data().len().max(1) as f64;
    let sum: f64 = bits
        .data()
        .iter()
        .zip(probs.data())
        .map(|(&b, &p)| {
            let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            -(b * p.ln() + (1.0 - b) * (1.0 - p).ln())
        })
        .sum();
    Ok(sum / count)
}

fn binary_cross_entropy_grad(bits: &Tensor, probs: &Tensor) -> Tensor {
    let count = bits.data().len().max(1) as f64;
    let data = bits
        .data()
        .iter()
        .zip(probs.data())
        .map(|(&b, &p)| {
            let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            (-b / p + (1.0 - b) / (1.0 - p)) / count
        })
        .collect();
    Tensor::from_vec(probs.rows(), probs.cols(), data).expect("same shape as probs")
}

/// Evaluates the loss and its gradients with respect to the decoder output
/// and the transmitted frames.
pub struct CompositeLoss {
    alpha: f64,
    peak: PaprPeak,
    oversampler: Oversampler,
}

pub struct LossGrads {
    pub probs: Tensor,
    pub frames: Tensor,
}

impl CompositeLoss {
    pub fn new(n: usize, oversample: usize, alpha: f64, peak: PaprPeak) -> Self {
        Self {
            alpha,
            peak,
            oversampler: Oversampler::new(n, oversample),
        }
    }

    pub fn evaluate(&mut self, bits: &Tensor, probs: &Tensor, frames: &Tensor) -> Result<LossBreakdown> {
        Ok(self.run(bits, probs, frames, false)?.0)
    }

    pub fn evaluate_with_grads(
        &mut self,
        bits: &Tensor,
        probs: &Tensor,
        frames: &Tensor,
    ) -> Result<(LossBreakdown, LossGrads)> {
        let (loss, grads) = self.run(bits, probs, frames, true)?;
        Ok((loss, grads.expect("requested")))
    }

    fn run(
        &mut self,
        bits: &Tensor,
        probs: &Tensor,
        frames: &Tensor,
        want_grads: bool,
    ) -> Result<(LossBreakdown, Option<LossGrads>)> {
        let n = self.oversampler.input_len();
        if frames.cols() != 2 * n || frames.rows() != bits.rows() {
            return Err(Error::Shape {
                context: "frames for the loss (rows, 2n)",
                expected: bits.rows() * 2 * n,
                actual: frames.data().len(),
            });
        }
        let bce = binary_cross_entropy(bits, probs)?;
        let rows = frames.rows().max(1) as f64;
        let mut frame_grads = Tensor::zeros(frames.rows(), frames.cols());
        let mut grad = vec![Complex64::new(0.0, 0.0); n];
        let mut exact_sum = 0.0;
        let mut peak_sum = 0.0;
        for i in 0..frames.rows() {
            let x = pairs_to_complex(frames.row(i))?;
            let exact = papr_with_grad(&mut self.oversampler, &x, &mut grad);
            let used = match self.peak {
                PaprPeak::Max => exact,
                PaprPeak::Smooth { temperature } => {
                    smooth_papr_with_grad(&mut self.oversampler, &x, temperature, &mut grad)
                }
            };
            exact_sum += exact;
            peak_sum += used;
            if want_grads && self.alpha > 0.0 {
                let scale = self.alpha / rows;
                grad.iter_mut().for_each(|g| *g *= scale);
                complex_to_pairs(&grad, frame_grads.row_mut(i));
            }
        }
        let loss = LossBreakdown {
            total: bce + self.alpha * peak_sum / rows,
            bce,
            papr: exact_sum / rows,
        };
        let grads = want_grads.then(|| LossGrads {
            probs: binary_cross_entropy_grad(bits, probs),
            frames: frame_grads,
        });
        Ok((loss, grads))
    }
}
