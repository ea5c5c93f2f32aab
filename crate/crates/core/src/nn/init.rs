use rand::Rng;

use super::tensor::Tensor;

/// Uniform on `+-sqrt(6 / (inputs + outputs))`.
pub fn glorot_uniform<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Tensor {
    assert!(inputs >= 1 && outputs >= 1, "layer dimensions must be positive");
    let limit = (6.0 / (inputs + outputs) as f64).sqrt();
    let data = (0..inputs * outputs)
        .map(|_| rng.random_range(-limit..limit))
        .collect();
    Tensor::from_vec(inputs, outputs, data).expect("sized by construction")
}
