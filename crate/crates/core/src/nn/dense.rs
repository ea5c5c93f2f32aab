use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::glorot_uniform;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Fully connected layer `y = x W + b`, with `W` of shape `(inputs, outputs)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Tensor,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(weights: Tensor, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::Shape {
                context: "dense bias",
                expected: weights.cols(),
                actual: bias.len(),
            });
        }
        if !weights.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("dense", "non-finite parameters"));
        }
        Ok(Self { weights, bias })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        Self {
            weights: glorot_uniform(inputs, outputs, rng),
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut y = x.matmul(&self.weights)?;
        for r in 0..y.rows() {
            for (v, b) in y.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, grad_out: &Tensor) -> Result<DenseGrads> {
        if grad_out.cols() != self.outputs() || grad_out.rows() != x.rows() {
            return Err(Error::Shape {
                context: "dense backward",
                expected: x.rows() * self.outputs(),
                actual: grad_out.rows() * grad_out.cols(),
            });
        }
        let input = grad_out.matmul_t(&self.weights)?;
        let weights = x.t_matmul(grad_out)?;
        let mut bias = vec![0.0; self.outputs()];
        for r in 0..grad_out.rows() {
            for (b, g) in bias.iter_mut().zip(grad_out.row(r)) {
                *b += g;
            }
        }
        Ok(DenseGrads { input, weights, bias })
    }
}
