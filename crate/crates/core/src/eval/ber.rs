use std::fmt::Write as _;

use super::modem::PacketSimulator;
use crate::dsp::noise_variance;
use crate::error::{Error, Result};
use crate::rng::{stream, STREAM_SWEEP_BASE};

/// Monte Carlo stopping rule per sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoppingRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub ebno_db: f64,
    pub bits: u64,
    pub errors: u64,
    /// False when `max_bits` ran out before `min_errors` was reached.
    pub converged: bool,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    /// Normal-approximation 95% half-width.
    pub fn ci95_half_width(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        let p = self.ber();
        1.96 * (p * (1.0 - p) / self.bits as f64).sqrt()
    }
}

/// Simulates one point until the stopping rule fires.
pub fn ber_point(sim: &mut PacketSimulator, ebno_db: f64, rule: StoppingRule, seed: u64, index: usize) -> Result<BerPoint> {
    let modem = sim.modem();
    let variance = noise_variance(ebno_db, modem.rate(), modem.upsampling())?;
    let mut rng = stream(seed, STREAM_SWEEP_BASE + index as u64);
    let (mut bits, mut errors) = (0u64, 0u64);
    while errors < rule.min_errors && bits < rule.max_bits {
        let (b, e) = sim.run_block(variance, &mut rng)?;
        bits += b;
        errors += e;
    }
    Ok(BerPoint {
        ebno_db,
        bits,
        errors,
        converged: errors >= rule.min_errors,
    })
}

/// Every point draws from its own stream `(seed, index)`, so the points can
/// be spread over threads without changing any result.
pub fn ber_sweep(sim: &PacketSimulator, ebno_db: &[f64], rule: StoppingRule, seed: u64) -> Result<Vec<BerPoint>> {
    if rule.min_errors == 0 || rule.max_bits == 0 {
        return Err(Error::invalid("stopping rule", "min_errors and max_bits must be positive"));
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(ebno_db.len().max(1));
    let mut slots: Vec<Option<Result<BerPoint>>> = (0..ebno_db.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let mut local = sim.clone();
                scope.spawn(move || {
                    (w..ebno_db.len())
                        .step_by(workers)
                        .map(|i| (i, ber_point(&mut local, ebno_db[i], rule, seed, i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every point assigned")).collect()
}

pub fn ber_csv(points: &[BerPoint], system: &str, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\n# system: {system}\n");
    out.push_str("ebno_db,bits,errors,ber,ci95_half_width,converged\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{:.6e},{:.6e},{}",
            p.ebno_db,
            p.bits,
            p.errors,
            p.ber(),
            p.ci95_half_width(),
            p.converged
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use crate::eval::modem::Modem;
    use crate::ofdm::OfdmConfig;

    fn ofdm_sim() -> PacketSimulator {
        let ch = ChannelRealization::pure_delay(0, 2048, 2048.0, 848.0);
        PacketSimulator::new(Modem::ofdm(OfdmConfig::reference(), 4, &ch).unwrap(), &ch, 1).unwrap()
    }

    #[test]
    fn confidence_interval() {
        let p = BerPoint {
            ebno_db: 0.0,
            bits: 10_000,
            errors: 100,
            converged: true,
        };
        assert!((p.ci95_half_width() - 1.96 * (0.01f64 * 0.99 / 1e4).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_is_repeatable_and_order_free() {
        let sim = ofdm_sim();
        let rule = StoppingRule {
            min_errors: 50,
            max_bits: 200_000,
        };
        let a = ber_sweep(&sim, &[0.0, 2.0, 4.0], rule, 9).unwrap();
        let b = ber_sweep(&sim, &[0.0, 2.0, 4.0], rule, 9).unwrap();
        assert_eq!(a, b);
        let single = ber_point(&mut sim.clone(), 2.0, rule, 9, 1).unwrap();
        assert_eq!(single, a[1]);
        assert!(a.iter().all(|p| p.converged));
    }

    #[test]
    fn max_bits_caps_a_point() {
        let rule = StoppingRule {
            min_errors: 10,
            max_bits: 1,
        };
        let p = ber_point(&mut ofdm_sim(), 30.0, rule, 1, 0).unwrap();
        assert!(!p.converged);
        assert_eq!(p.bits, 4 * 648);
    }
}
