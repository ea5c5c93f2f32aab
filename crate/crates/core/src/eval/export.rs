use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::digest::sha256_hex;

/// Magnitudes below this floor (such as the zeroed DC bin) are written at it.
pub const MAGNITUDE_FLOOR_DB: f64 = -300.0;

/// `(frequency_hz, magnitude_db, phase_rad)` per grid point.
pub fn response_csv(channel: &ChannelRealization, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\nfrequency_hz,magnitude_db,phase_rad\n");
    for (f, h) in channel.freq_grid.iter().zip(&channel.response) {
        let db = (20.0 * h.norm().log10()).max(MAGNITUDE_FLOOR_DB);
        let _ = writeln!(out, "{f:.6},{db:.9},{:.9}", h.arg());
    }
    out
}

/// `(index, re, im)` per tap.
pub fn impulse_csv(channel: &ChannelRealization, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\nindex,re,im\n");
    for (i, h) in channel.impulse.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.17e},{:.17e}", h.re, h.im);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub path: String,
    pub sha256: String,
}

impl OutputChecksum {
    pub fn of(path: impl Into<String>, contents: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: sha256_hex(contents),
        }
    }
}

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub alpha: f64,
    pub code_version: String,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub outputs: Vec<OutputChecksum>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}
