use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-5;
pub const DEFAULT_MOMENTUM: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Batch statistics; running averages are updated.
    Train,
    /// Running statistics.
    Infer,
}

/// Per-feature batch normalization with affine output `gamma * x_hat + beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
}

#[derive(Clone, Debug)]
pub struct BatchNormCache {
    pub mode: Mode,
    pub normalized: Tensor,
    pub inv_std: Vec<f64>,
    pub batch_mean: Vec<f64>,
    /// Unbiased batch variance, fed into the running average.
    pub batch_var: Vec<f64>,
}

impl BatchNorm {
    pub fn new(features: usize) -> Self {
        Self {
            gamma: vec![1.0; features],
            beta: vec![0.0; features],
            running_mean: vec![0.0; features],
            running_var: vec![1.0; features],
            eps: DEFAULT_EPS,
            momentum: DEFAULT_MOMENTUM,
        }
    }

    pub fn features(&self) -> usize {
        self.gamma.len()
    }

    pub fn forward(&self, x: &Tensor, mode: Mode) -> Result<(Tensor, BatchNormCache)> {
        let f = self.features();
        if x.cols() != f {
            return Err(Error::Shape {
                context: "batch norm features",
                expected: f,
                actual: x.cols(),
            });
        }
        let n = x.rows();
        let (mean, var_biased, var_unbiased) = match mode {
            Mode::Train => {
                if n < 2 {
                    return Err(Error::invalid("batch", "train-mode batch norm needs at least 2 rows"));
                }
                let mut mean = vec![0.0; f];
                for r in 0..n {
                    for (m, v) in mean.iter_mut().zip(x.row(r)) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= n as f64);
                let mut var = vec![0.0; f];
                for r in 0..n {
                    for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                        *s += (v - m) * (v - m);
                    }
                }
                let biased: Vec<f64> = var.iter().map(|s| s / n as f64).collect();
                let unbiased: Vec<f64> = var.iter().map(|s| s / (n - 1) as f64).collect();
                (mean, biased, unbiased)
            }
            Mode::Infer => (
                self.running_mean.clone(),
                self.running_var.clone(),
                self.running_var.clone(),
            ),
        };
        let inv_std: Vec<f64> = var_biased.iter().map(|v| 1.0 / (v + self.eps).sqrt()).collect();
        let mut normalized = Tensor::zeros(n, f);
        let mut y = Tensor::zeros(n, f);
        for r in 0..n {
            let xr = x.row(r);
            let nr = normalized.row_mut(r);
            for j in 0..f {
                nr[j] = (xr[j] - mean[j]) * inv_std[j];
            }
            let nr = normalized.row(r).to_vec();
            for (j, out) in y.row_mut(r).iter_mut().enumerate() {
                *out = self.gamma[j] * nr[j] + self.beta[j];
            }
        }
        Ok((
            y,
            BatchNormCache {
                mode,
                normalized,
                inv_std,
                batch_mean: mean,
                batch_var: var_unbiased,
            },
        ))
    }

    /// Returns `(dL/dx, dL/dgamma, dL/dbeta)`.
    pub fn backward(&self, cache: &BatchNormCache, grad_out: &Tensor) -> (Tensor, Vec<f64>, Vec<f64>) {
        let f = self.features();
        let n = grad_out.rows();
        let mut grad_gamma = vec![0.0; f];
        let mut grad_beta = vec![0.0; f];
        for r in 0..n {
            for j in 0..f {
                let g = grad_out.row(r)[j];
                grad_beta[j] += g;
                grad_gamma[j] += g * cache.normalized.row(r)[j];
            }
        }
        let mut grad_in = Tensor::zeros(n, f);
        match cache.mode {
            Mode::Infer => {
                for r in 0..n {
                    let g = grad_out.row(r);
                    for (j, out) in grad_in.row_mut(r).iter_mut().enumerate() {
                        *out = g[j] * self.gamma[j] * cache.inv_std[j];
                    }
                }
            }
            Mode::Train => {
                // dx = inv_std / N * (N dxh - sum(dxh) - xh * sum(dxh * xh)), dxh = g * gamma
                let nf = n as f64;
                for r in 0..n {
                    let g = grad_out.row(r);
                    let xh = cache.normalized.row(r);
                    for (j, out) in grad_in.row_mut(r).iter_mut().enumerate() {
                        let dxh = g[j] * self.gamma[j];
                        let sum_dxh = grad_beta[j] * self.gamma[j];
                        let sum_dxh_xh = grad_gamma[j] * self.gamma[j];
                        *out = cache.inv_std[j] / nf * (nf * dxh - sum_dxh - xh[j] * sum_dxh_xh);
                    }
                }
            }
        }
        (grad_in, grad_gamma, grad_beta)
    }

    /// Folds the batch statistics of a train-mode pass into the running averages.
    pub fn update_running(&mut self, cache: &BatchNormCache) {
        if cache.mode != Mode::Train {
            return;
        }
        let m = self.momentum;
        for j in 0..self.features() {
            self.running_mean[j] = m * self.running_mean[j] + (1.0 - m) * cache.batch_mean[j];
            self.running_var[j] = m * self.running_var[j] + (1.0 - m) * cache.batch_var[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, f: usize, scale: f64) -> Tensor {
        Tensor::from_vec(
            n,
            f,
            (0..n * f).map(|i| scale * ((i as f64 * 0.91).sin() + 0.3 * (i % 5) as f64)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn train_mode_standardizes() {
        let bn = BatchNorm::new(4);
        // large spread so eps / var is below 1e-8
        let x = sample(32, 4, 1e3);
        let (y, _) = bn.forward(&x, Mode::Train).unwrap();
        for j in 0..4 {
            let col: Vec<f64> = (0..32).map(|r| y.row(r)[j]).collect();
            let mean = col.iter().sum::<f64>() / 32.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 32.0;
            assert!(mean.abs() < 1e-10, "{mean}");
            assert!((var - 1.0).abs() < 1e-8, "{var}");
        }
    }

    #[test]
    fn infer_with_unit_stats_is_identity() {
        let mut bn = BatchNorm::new(3);
        bn.eps = 0.0;
        let x = sample(5, 3, 1.0);
        let (y, _) = bn.forward(&x, Mode::Infer).unwrap();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_row_train_rejected() {
        let bn = BatchNorm::new(3);
        assert!(bn.forward(&sample(1, 3, 1.0), Mode::Train).is_err());
        assert!(bn.forward(&sample(1, 3, 1.0), Mode::Infer).is_ok());
    }

    #[test]
    fn running_stats_move_toward_batch() {
        let mut bn = BatchNorm::new(2);
        let x = Tensor::from_vec(2, 2, vec![1.0, 10.0, 3.0, 30.0]).unwrap();
        let (_, cache) = bn.forward(&x, Mode::Train).unwrap();
        bn.update_running(&cache);
        assert!((bn.running_mean[0] - 0.2).abs() < 1e-12);
        assert!((bn.running_mean[1] - 2.0).abs() < 1e-12);
        // unbiased var of (1,3) is 2
        assert!((bn.running_var[0] - (0.9 + 0.2)).abs() < 1e-12);
    }
}
