//! Run configuration, Monte Carlo BER sweeps, PAPR and spectrum statistics,
//! and CSV/manifest export.

pub mod ber;
pub mod config;
pub mod export;
pub mod modem;
pub mod spectra;
pub mod theory;

pub use ber::{ber_csv, ber_point, ber_sweep, BerPoint, StoppingRule};
pub use config::{DbRange, DrillStringSection, OfdmSection, PaprSection, PsdSection, SimConfig, SweepSection, TrainingSection};
pub use export::{impulse_csv, response_csv, unix_now, OutputChecksum, RunManifest};
pub use modem::{Modem, PacketSimulator};
pub use spectra::{exceedance_level, inband_fraction, papr_ccdf_csv, papr_samples_db, psd_csv, transmit_psd};
pub use theory::{q_function, qpsk_awgn_ber, qpsk_awgn_ebno_for};

use crate::ae::AEModel;
use crate::error::{Error, Result};

/// Rejects a model trained for a different geometry or channel than `config`.
pub fn check_model(model: &AEModel, config: &SimConfig) -> Result<()> {
    let a = &model.config;
    let b = config.ae_config();
    let same = a.m == b.m && a.n == b.n && a.p == b.p && a.u == b.u && a.l == b.l && a.f_c == b.f_c && a.f_s == b.f_s;
    if !same {
        return Err(Error::ModelMismatch(format!(
            "model frame geometry (m={}, n={}, p={}, u={}, l={}, f_c={}, f_s={}) differs from the config",
            a.m, a.n, a.p, a.u, a.l, a.f_c, a.f_s
        )));
    }
    if let Some(tag) = &model.channel_tag {
        if *tag != config.channel_tag() {
            return Err(Error::ModelMismatch("model was trained on a different channel".into()));
        }
    }
    Ok(())
}
