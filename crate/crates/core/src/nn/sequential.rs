use serde::{Deserialize, Serialize};

use super::activation::{relu, relu_backward, sigmoid, sigmoid_backward};
use super::batchnorm::{BatchNorm, BatchNormCache, Mode};
use super::dense::Dense;
use super::tensor::Tensor;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    Dense(Dense),
    BatchNorm(BatchNorm),
    Relu,
    Sigmoid,
}

enum Cache {
    Input(Tensor),
    Output(Tensor),
    BatchNorm(BatchNormCache),
}

/// Per-layer intermediate values of one forward pass.
pub struct Tape {
    caches: Vec<Cache>,
}

/// A straight stack of layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn forward(&self, x: &Tensor, mode: Mode) -> Result<(Tensor, Tape)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer {
                Layer::Dense(d) => {
                    let y = d.forward(&cur)?;
                    caches.push(Cache::Input(cur));
                    y
                }
                Layer::BatchNorm(bn) => {
                    let (y, cache) = bn.forward(&cur, mode)?;
                    caches.push(Cache::BatchNorm(cache));
                    y
                }
                Layer::Relu => {
                    let y = relu(&cur);
                    caches.push(Cache::Output(y.clone()));
                    y
                }
                Layer::Sigmoid => {
                    let y = sigmoid(&cur);
                    caches.push(Cache::Output(y.clone()));
                    y
                }
            };
        }
        Ok((cur, Tape { caches }))
    }

    /// Forward pass in inference mode without keeping intermediates.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer {
                Layer::Dense(d) => d.forward(&cur)?,
                Layer::BatchNorm(bn) => bn.forward(&cur, Mode::Infer)?.0,
                Layer::Relu => relu(&cur),
                Layer::Sigmoid => sigmoid(&cur),
            };
        }
        Ok(cur)
    }

    /// Back-propagates `grad_out`; returns the input gradient and parameter
    /// gradients in [`Sequential::parameters`] order.
    pub fn backward(&self, tape: &Tape, grad_out: &Tensor) -> Result<(Tensor, Vec<Vec<f64>>)> {
        let mut grads: Vec<Vec<f64>> = Vec::new();
        let mut g = grad_out.clone();
        for (layer, cache) in self.layers.iter().zip(&tape.caches).rev() {
            g = match (layer, cache) {
                (Layer::Dense(d), Cache::Input(x)) => {
                    let dg = d.backward(x, &g)?;
                    grads.push(dg.bias);
                    grads.push(dg.weights.into_data());
                    dg.input
                }
                (Layer::BatchNorm(bn), Cache::BatchNorm(c)) => {
                    let (gi, gg, gb) = bn.backward(c, &g);
                    grads.push(gb);
                    grads.push(gg);
                    gi
                }
                (Layer::Relu, Cache::Output(y)) => relu_backward(y, &g),
                (Layer::Sigmoid, Cache::Output(y)) => sigmoid_backward(y, &g),
                _ => unreachable!("tape does not match layer stack"),
            };
        }
        grads.reverse();
        Ok((g, grads))
    }

    /// Copies train-mode batch statistics into the running averages.
    pub fn commit_batch_stats(&mut self, tape: &Tape) {
        for (layer, cache) in self.layers.iter_mut().zip(&tape.caches) {
            if let (Layer::BatchNorm(bn), Cache::BatchNorm(c)) = (layer, cache) {
                bn.update_running(c);
            }
        }
    }

    pub fn parameters(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.push(d.weights.data());
                    out.push(&d.bias);
                }
                Layer::BatchNorm(bn) => {
                    out.push(&bn.gamma);
                    out.push(&bn.beta);
                }
                Layer::Relu | Layer::Sigmoid => {}
            }
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.push(d.weights.data_mut());
                    out.push(&mut d.bias);
                }
                Layer::BatchNorm(bn) => {
                    out.push(&mut bn.gamma);
                    out.push(&mut bn.beta);
                }
                Layer::Relu | Layer::Sigmoid => {}
            }
        }
        out
    }

    pub fn parameter_sizes(&self) -> Vec<usize> {
        self.parameters().iter().map(|p| p.len()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_sizes().iter().sum()
    }

    pub fn input_width(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match l {
            Layer::Dense(d) => Some(d.inputs()),
            _ => None,
        })
    }

    pub fn output_width(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| match l {
            Layer::Dense(d) => Some(d.outputs()),
            Layer::BatchNorm(bn) => Some(bn.features()),
            _ => None,
        })
    }
}
