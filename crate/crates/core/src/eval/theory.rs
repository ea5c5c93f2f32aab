//! Closed-form references.

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Bit error rate of Gray-coded QPSK (equivalently BPSK) on AWGN,
/// `Q(sqrt(2 Eb/N0))`.
pub fn qpsk_awgn_ber(ebno_db: f64) -> f64 {
    q_function((2.0 * 10f64.powf(ebno_db / 10.0)).sqrt())
}

/// The `Eb/N0` in dB at which [`qpsk_awgn_ber`] equals `ber`, by bisection.
/// `ber` must lie in `(0, 0.5)`.
pub fn qpsk_awgn_ebno_for(ber: f64) -> Option<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return None;
    }
    let (mut lo, mut hi) = (-60.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if qpsk_awgn_ber(mid) > ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
