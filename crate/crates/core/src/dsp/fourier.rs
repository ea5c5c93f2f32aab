use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse DFT of one size, both scaled by `1/sqrt(len)`.
#[derive(Clone)]
pub struct UnitaryDft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl std::fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryDft").field("len", &self.len).finish()
    }
}

impl UnitaryDft {
    pub fn new(len: usize) -> Self {
        Self::with_planner(len, &mut FftPlanner::new())
    }

    pub fn with_planner(len: usize, planner: &mut FftPlanner<f64>) -> Self {
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            len,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            scale: 1.0 / (len as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
        let s = self.scale;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        let s = self.scale;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    /// Unnormalized forward transform.
    pub fn forward_raw(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Unnormalized inverse transform.
    pub fn inverse_raw(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }
}

/// Smallest `2^a 3^b >= min_len`.
pub fn fast_len(min_len: usize) -> usize {
    let mut best = min_len.next_power_of_two();
    let mut p3 = 1usize;
    while p3 < best {
        let mut v = p3;
        while v < min_len {
            v *= 2;
        }
        best = best.min(v);
        p3 *= 3;
    }
    best
}
