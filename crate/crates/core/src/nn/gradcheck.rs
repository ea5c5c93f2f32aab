//! Central finite differences for verifying analytic gradients.

/// Numerical gradient of `f` at `x` with symmetric step `step`.
pub fn central_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `||a - b|| / max(||a||, ||b||)`, zero when both vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic() {
        let g = central_difference(|x| x[0].powi(3) + 2.0 * x[1], &[2.0, 5.0], 1e-5);
        assert!((g[0] - 12.0).abs() < 1e-8);
        assert!((g[1] - 2.0).abs() < 1e-8);
        assert!(relative_error(&[12.0, 2.0], &g) < 1e-9);
    }
}
