//! Autoencoder modem: encoder and decoder networks trained end to end
//! through the differentiable packet link.

pub mod channel_layer;
pub mod config;
pub mod loss;
pub mod model;
pub mod train;

pub use channel_layer::ChannelLayer;
pub use config::{AEConfig, PaprPeak};
pub use loss::{binary_cross_entropy, CompositeLoss, LossBreakdown, LossGrads, PROB_FLOOR};
pub use model::{hard_decisions, normalize_power, normalize_power_backward, AEModel, EncodeTape};
pub use train::{train, train_with_progress, EpochRecord, TrainReport};
