use num_complex::Complex64;
use rustfft::FftPlanner;

use super::fourier::UnitaryDft;
use crate::error::{Error, Result};

pub const DEFAULT_OVERSAMPLE: usize = 4;

/// Band-limited interpolation by DFT zero padding.
///
/// The `n` input bins are kept contiguous at the bottom of the larger
/// spectrum, the same placement the carrier upconversion uses, so the
/// interpolated envelope is the envelope of the transmitted waveform.
#[derive(Clone, Debug)]
pub struct Oversampler {
    n: usize,
    factor: usize,
    small: UnitaryDft,
    large: UnitaryDft,
    buf: Vec<Complex64>,
}

impl Oversampler {
    pub fn new(n: usize, factor: usize) -> Self {
        assert!(n > 0 && factor > 0);
        let mut planner = FftPlanner::new();
        Self {
            n,
            factor,
            small: UnitaryDft::with_planner(n, &mut planner),
            large: UnitaryDft::with_planner(n * factor, &mut planner),
            buf: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.n * self.factor
    }

    pub fn apply(&mut self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.output_len());
        self.buf.copy_from_slice(x);
        self.small.forward(&mut self.buf);
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        out[..self.n].copy_from_slice(&self.buf);
        self.large.inverse(out);
        let g = (self.factor as f64).sqrt();
        out.iter_mut().for_each(|v| *v *= g);
    }

    pub fn adjoint(&mut self, grad: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(grad.len(), self.output_len());
        assert_eq!(out.len(), self.n);
        let mut big = grad.to_vec();
        self.large.forward(&mut big);
        out.copy_from_slice(&big[..self.n]);
        self.small.inverse(out);
        let g = (self.factor as f64).sqrt();
        out.iter_mut().for_each(|v| *v *= g);
    }
}

fn peak_and_mean(x: &[Complex64]) -> (usize, f64, f64) {
    let mut peak = 0.0;
    let mut arg = 0;
    let mut sum = 0.0;
    for (i, v) in x.iter().enumerate() {
        let p = v.norm_sqr();
        sum += p;
        if p > peak {
            peak = p;
            arg = i;
        }
    }
    (arg, peak, sum / x.len() as f64)
}

/// Peak-to-average power ratio after `oversample`-fold interpolation.
pub fn papr(x: &[Complex64], oversample: usize) -> Result<f64> {
    if x.is_empty() || x.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::invalid("x", "PAPR of an all-zero signal is undefined"));
    }
    if oversample == 0 {
        return Err(Error::invalid("oversample", "must be at least 1"));
    }
    let mut os = Oversampler::new(x.len(), oversample);
    let mut up = vec![Complex64::new(0.0, 0.0); os.output_len()];
    os.apply(x, &mut up);
    let (_, peak, mean) = peak_and_mean(&up);
    Ok(peak / mean)
}

pub fn papr_db(x: &[Complex64], oversample: usize) -> Result<f64> {
    Ok(10.0 * papr(x, oversample)?.log10())
}

/// PAPR of `x` and its gradient with respect to `x`, using the subgradient
/// at the (first) peak sample. Gradients follow the `d/dre + j d/dim`
/// convention.
pub fn papr_with_grad(os: &mut Oversampler, x: &[Complex64], grad: &mut [Complex64]) -> f64 {
    let mut up = vec![Complex64::new(0.0, 0.0); os.output_len()];
    os.apply(x, &mut up);
    let (arg, peak, mean) = peak_and_mean(&up);
    let len = up.len() as f64;
    let ratio = peak / mean;
    let mut g_up: Vec<Complex64> = up.iter().map(|v| v * (-2.0 * ratio / (mean * len))).collect();
    g_up[arg] += up[arg] * (2.0 / mean);
    os.adjoint(&g_up, grad);
    ratio
}

/// Soft-maximum variant of [`papr_with_grad`]: the peak of the normalized
/// sample powers `q_i` is replaced by `t * ln sum exp(q_i / t)`, which tends
/// to the true PAPR from above as `t -> 0`.
pub fn smooth_papr_with_grad(os: &mut Oversampler, x: &[Complex64], temperature: f64, grad: &mut [Complex64]) -> f64 {
    let mut up = vec![Complex64::new(0.0, 0.0); os.output_len()];
    os.apply(x, &mut up);
    let len = up.len() as f64;
    let mean = up.iter().map(|v| v.norm_sqr()).sum::<f64>() / len;
    let q: Vec<f64> = up.iter().map(|v| v.norm_sqr() / mean).collect();
    let top = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = q.iter().map(|&v| ((v - top) / temperature).exp()).collect();
    let total: f64 = weights.iter().sum();
    let soft = top + temperature * total.ln();
    let weighted_q: f64 = weights.iter().zip(&q).map(|(w, v)| w * v).sum::<f64>() / total;
    let g_up: Vec<Complex64> = up
        .iter()
        .zip(&weights)
        .map(|(v, w)| v * (2.0 / mean * (w / total - weighted_q / len)))
        .collect();
    os.adjoint(&g_up, grad);
    soft
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize, bin: usize, amp: f64) -> Vec<Complex64> {
        (0..n)
            .map(|t| Complex64::from_polar(amp, 2.0 * PI * (bin * t) as f64 / n as f64))
            .collect()
    }

    #[test]
    fn single_tone_is_zero_db() {
        let x = tone(64, 5, 1.0);
        assert!((papr(&x, 4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_tones_is_three_db() {
        let a = tone(64, 3, 1.0);
        let b = tone(64, 10, 1.0);
        let x: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let r = papr(&x, 4).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
        assert!((10.0 * r.log10() - 3.0103).abs() < 1e-3);
    }

    #[test]
    fn zero_signal_rejected() {
        assert!(papr(&[Complex64::new(0.0, 0.0); 8], 4).is_err());
    }

    #[test]
    fn oversampler_adjoint() {
        let mut os = Oversampler::new(16, 4);
        let x: Vec<Complex64> = (0..16).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let g: Vec<Complex64> = (0..64).map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64).sin())).collect();
        let mut ax = vec![Complex64::new(0.0, 0.0); 64];
        let mut atg = vec![Complex64::new(0.0, 0.0); 16];
        os.apply(&x, &mut ax);
        os.adjoint(&g, &mut atg);
        let lhs: Complex64 = ax.iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = x.iter().zip(&atg).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new(((i * 7 % 5) as f64) - 2.0, (i as f64 * 1.3).sin()))
            .collect();
        let mut os = Oversampler::new(8, 4);
        let mut grad = vec![Complex64::new(0.0, 0.0); 8];
        papr_with_grad(&mut os, &x, &mut grad);
        let h = 1e-6;
        for i in 0..8 {
            for part in 0..2 {
                let bump = if part == 0 { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
                let mut xp = x.clone();
                xp[i] += bump;
                let mut xm = x.clone();
                xm[i] -= bump;
                let fd = (papr(&xp, 4).unwrap() - papr(&xm, 4).unwrap()) / (2.0 * h);
                let an = if part == 0 { grad[i].re } else { grad[i].im };
                assert!((fd - an).abs() < 1e-6 * (1.0 + fd.abs()), "{i}/{part}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn smooth_peak_gradient_and_limit() {
        let x: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new((i as f64 * 0.9).cos(), (i as f64 * 1.3).sin()))
            .collect();
        let mut os = Oversampler::new(8, 4);
        let mut grad = vec![Complex64::new(0.0, 0.0); 8];
        let t = 0.3;
        let value = smooth_papr_with_grad(&mut os, &x, t, &mut grad);
        let exact = papr(&x, 4).unwrap();
        assert!(value >= exact && value <= exact + t * (32f64).ln());
        let mut scratch = vec![Complex64::new(0.0, 0.0); 8];
        let h = 1e-6;
        for i in 0..8 {
            let mut xp = x.clone();
            xp[i] += Complex64::new(0.0, h);
            let mut xm = x.clone();
            xm[i] -= Complex64::new(0.0, h);
            let fd = (smooth_papr_with_grad(&mut os, &xp, t, &mut scratch)
                - smooth_papr_with_grad(&mut os, &xm, t, &mut scratch))
                / (2.0 * h);
            assert!((fd - grad[i].im).abs() < 1e-6 * (1.0 + fd.abs()), "{i}: {fd} vs {}", grad[i].im);
        }
    }
}
