//! Command implementations behind the `dsac` binary. Each command reads a
//! [`SimConfig`], writes CSV outputs into a directory and returns the
//! [`RunManifest`] it also writes there.

use std::fs;
use std::path::{Path, PathBuf};

use dsac_core::ae::{train_with_progress, AEModel, EpochRecord};
use dsac_core::channel::ChannelRealization;
use dsac_core::eval::{
    ber_csv, ber_sweep, check_model, impulse_csv, papr_ccdf_csv, papr_samples_db, psd_csv, response_csv,
    transmit_psd, unix_now, Modem, OutputChecksum, PacketSimulator, RunManifest, SimConfig, StoppingRule,
};
use dsac_core::rng::{stream, STREAM_PAPR, STREAM_PSD};

pub use dsac_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write `{path}`: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Output { .. } => "output",
            CliError::Core(e) => match e {
                CoreError::Config { .. } | CoreError::InvalidParameter { .. } | CoreError::FractionalCarrier(_) => {
                    "config"
                }
                CoreError::ModelMismatch(_) => "model_mismatch",
                CoreError::Divergence { .. } => "divergence",
                CoreError::Io(_) => "io",
                CoreError::Json(_) => "json",
                _ => "simulation",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" | "config" => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    Ae,
    Ofdm,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Ae => "ae",
            System::Ofdm => "ofdm",
        }
    }
}

/// Collects outputs of one command and writes its manifest.
struct Run<'a> {
    command: &'static str,
    config: &'a SimConfig,
    out: &'a Path,
    started_at: f64,
    outputs: Vec<OutputChecksum>,
    warnings: Vec<String>,
}

impl<'a> Run<'a> {
    fn start(command: &'static str, config: &'a SimConfig, out: &'a Path) -> Result<Self> {
        fs::create_dir_all(out).map_err(|source| CliError::Output {
            path: out.to_path_buf(),
            source,
        })?;
        Ok(Self {
            command,
            config,
            out,
            started_at: unix_now(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Output { path, source })?;
        self.outputs.push(OutputChecksum::of(name, contents.as_bytes()));
        Ok(())
    }

    fn finish(mut self) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            config_hash: self.config.hash(),
            seed: self.config.seed,
            alpha: self.config.alpha,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            finished_at: unix_now(),
            outputs: std::mem::take(&mut self.outputs),
            warnings: std::mem::take(&mut self.warnings),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(CoreError::from)?;
        let path = self.out.join(format!("{}_manifest.json", self.command.replace('-', "_")));
        fs::write(&path, text).map_err(|source| CliError::Output { path, source })?;
        Ok(manifest)
    }
}

/// Writes `response.csv` and `impulse.csv`.
pub fn cmd_channel(config: &SimConfig, out: &Path) -> Result<RunManifest> {
    let mut run = Run::start("channel", config, out)?;
    let channel = config.channel()?;
    let hash = config.hash();
    run.write("response.csv", &response_csv(&channel, &hash))?;
    run.write("impulse.csv", &impulse_csv(&channel, &hash))?;
    run.finish()
}

/// Trains on the configured channel; writes `model.json` and `train_report.csv`.
pub fn cmd_train(config: &SimConfig, out: &Path, progress: impl FnMut(&EpochRecord)) -> Result<RunManifest> {
    let mut run = Run::start("train", config, out)?;
    let channel = config.channel()?;
    let (mut model, mut report) = train_with_progress(&config.ae_config(), &channel, progress)?;
    model.channel_tag = Some(config.channel_tag());
    report.config_hash = config.hash();
    run.write("model.json", &model.to_json()?)?;
    run.write("train_report.csv", &report.to_csv())?;
    run.finish()
}

fn build_modem(config: &SimConfig, system: System, model: Option<&Path>, channel: &ChannelRealization) -> Result<Modem> {
    match system {
        System::Ae => {
            let path = model.ok_or_else(|| CliError::Usage("--system ae requires --model PATH".into()))?;
            let model = AEModel::load(path)?;
            check_model(&model, config)?;
            Ok(Modem::autoencoder(model))
        }
        System::Ofdm => Ok(Modem::ofdm(config.ofdm_config(), config.ofdm.p, channel)?),
    }
}

/// Packets simulated per block; a block is the unit between stopping-rule checks.
const PACKETS_PER_BLOCK: usize = 8;

/// Writes `ber.csv`. Points that hit `max_bits` first are listed as warnings.
pub fn cmd_eval_ber(config: &SimConfig, system: System, model: Option<&Path>, out: &Path) -> Result<RunManifest> {
    let mut run = Run::start("eval-ber", config, out)?;
    let channel = config.channel()?;
    let modem = build_modem(config, system, model, &channel)?;
    let sim = PacketSimulator::new(modem, &channel, PACKETS_PER_BLOCK)?;
    let rule = StoppingRule {
        min_errors: config.sweep.min_errors,
        max_bits: config.sweep.max_bits,
    };
    let points = ber_sweep(&sim, &config.sweep.ebno_db.values()?, rule, config.seed)?;
    for p in points.iter().filter(|p| !p.converged) {
        run.warnings.push(format!(
            "Eb/N0 {} dB stopped at max_bits={} with {} errors (< min_errors={})",
            p.ebno_db, p.bits, p.errors, rule.min_errors
        ));
    }
    run.write("ber.csv", &ber_csv(&points, system.name(), &config.hash()))?;
    run.finish()
}

/// Writes `papr_ccdf.csv`.
pub fn cmd_eval_papr(config: &SimConfig, system: System, model: Option<&Path>, out: &Path) -> Result<RunManifest> {
    let mut run = Run::start("eval-papr", config, out)?;
    let channel = config.channel()?;
    let modem = build_modem(config, system, model, &channel)?;
    let mut rng = stream(config.seed, STREAM_PAPR);
    let values = papr_samples_db(&modem, config.papr.frames, config.papr.oversample, &mut rng)?;
    let thresholds = config.papr.thresholds_db.values()?;
    run.write("papr_ccdf.csv", &papr_ccdf_csv(&values, &thresholds, system.name(), &config.hash()))?;
    run.finish()
}

/// Writes `psd.csv`.
pub fn cmd_eval_psd(config: &SimConfig, system: System, model: Option<&Path>, out: &Path) -> Result<RunManifest> {
    let mut run = Run::start("eval-psd", config, out)?;
    let channel = config.channel()?;
    let modem = build_modem(config, system, model, &channel)?;
    let mut sim = PacketSimulator::new(modem, &channel, 1)?;
    let mut rng = stream(config.seed, STREAM_PSD);
    let psd = transmit_psd(&mut sim, config.psd.packets, config.f_s, config.psd.welch(), &mut rng)?;
    run.write("psd.csv", &psd_csv(&psd, system.name(), &config.hash()))?;
    run.finish()
}

/// Loads a config and applies command-line overrides.
pub fn load_config(path: &Path, seed: Option<u64>, ebno: Option<&str>) -> Result<SimConfig> {
    let mut config = SimConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(range) = ebno {
        config.sweep.ebno_db = dsac_core::eval::DbRange::parse(range)?;
    }
    config.validate()?;
    Ok(config)
}
