//! Minimal dense-network engine: dense layers, ReLU and sigmoid, batch
//! normalization, Glorot initialization and Adam, all in `f64`.

mod activation;
mod adam;
mod batchnorm;
mod dense;
pub mod gradcheck;
mod init;
mod sequential;
mod tensor;

pub use activation::{relu, relu_backward, sigmoid, sigmoid_backward, sigmoid_scalar};
pub use adam::{AdamConfig, AdamState};
pub use batchnorm::{BatchNorm, BatchNormCache, Mode, DEFAULT_EPS, DEFAULT_MOMENTUM};
pub use dense::{Dense, DenseGrads};
pub use init::glorot_uniform;
pub use sequential::{Layer, Sequential, Tape};
pub use tensor::Tensor;
