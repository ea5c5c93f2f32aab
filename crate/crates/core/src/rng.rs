//! Seeded, independent random streams.
//!
//! Every consumer of randomness draws from a ChaCha8 stream identified by
//! `(master seed, stream id)`, so results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nn::Tensor;

pub const STREAM_INIT: u64 = 1;
pub const STREAM_TRAIN_BITS: u64 = 2;
pub const STREAM_TRAIN_NOISE: u64 = 3;
pub const STREAM_TEST: u64 = 4;
/// Sweep point `i` uses stream `STREAM_SWEEP_BASE + i`.
pub const STREAM_SWEEP_BASE: u64 = 1 << 16;
pub const STREAM_PAPR: u64 = 5;
pub const STREAM_PSD: u64 = 6;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// `rows x width` tensor of uniform {0, 1} bits.
pub fn random_bits<R: Rng + ?Sized>(rows: usize, width: usize, rng: &mut R) -> Tensor {
    let data = (0..rows * width)
        .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
        .collect();
    Tensor::from_vec(rows, width, data).expect("sized by construction")
}
