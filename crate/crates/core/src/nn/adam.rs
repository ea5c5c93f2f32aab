use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam with one moment pair per parameter tensor.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Self {
            config,
            first: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[Vec<f64>]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::Shape {
                context: "adam parameter list",
                expected: self.first.len(),
                actual: params.len().min(grads.len()),
            });
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first[i].len() || g.len() != p.len() {
                return Err(Error::Shape {
                    context: "adam parameter tensor",
                    expected: self.first[i].len(),
                    actual: p.len().min(g.len()),
                });
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            eps,
        } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            for j in 0..p.len() {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                p[j] -= learning_rate * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut state = AdamState::new(AdamConfig::default(), &[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let before = p.clone();
        state.step(&mut [&mut p], &[vec![0.0; 3]]).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_lr_sign() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut p = vec![0.0, 0.0];
        state.step(&mut [&mut p], &[vec![3.0, -0.02]]).unwrap();
        assert!((p[0] + 1e-3).abs() < 1e-9);
        assert!((p[1] - 1e-3).abs() < 1e-6);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut p = vec![0.0; 3];
        assert!(state.step(&mut [&mut p], &[vec![0.0; 3]]).is_err());
    }
}
