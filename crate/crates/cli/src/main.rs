use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsac_cli::{cmd_channel, cmd_eval_ber, cmd_eval_papr, cmd_eval_psd, cmd_train, load_config, CliError, System};

#[derive(Parser)]
#[command(name = "dsac", version, about = "Drill string acoustic telemetry simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Simulation config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Eval {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    system: SystemArg,
    /// Trained autoencoder, required for `--system ae`.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Ae,
    Ofdm,
}

#[derive(Subcommand)]
enum Command {
    /// Export the channel frequency and impulse responses.
    Channel(Common),
    /// Train the autoencoder on the configured channel.
    Train(Common),
    /// Monte Carlo BER sweep.
    EvalBer {
        #[command(flatten)]
        eval: Eval,
        /// Eb/N0 sweep as start:step:stop in dB.
        #[arg(long)]
        ebno: Option<String>,
    },
    /// PAPR complementary CDF.
    EvalPapr(Eval),
    /// Power spectral density of the transmit signal.
    EvalPsd(Eval),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let manifest = match cli.command {
        Command::Channel(c) => cmd_channel(&load_config(&c.config, c.seed, None)?, &c.out)?,
        Command::Train(c) => {
            let config = load_config(&c.config, c.seed, None)?;
            cmd_train(&config, &c.out, |e| {
                eprintln!(
                    "epoch {:>4}  train {:.5}  test {:.5}  bce {:.5}  papr {:.3}  ({:.1}s)",
                    e.epoch, e.train_loss, e.test.total, e.test.bce, e.test.papr, e.wall_seconds
                );
            })?
        }
        Command::EvalBer { eval, ebno } => {
            let config = load_config(&eval.common.config, eval.common.seed, ebno.as_deref())?;
            cmd_eval_ber(&config, system(eval.system), eval.model.as_deref(), &eval.common.out)?
        }
        Command::EvalPapr(eval) => {
            let config = load_config(&eval.common.config, eval.common.seed, None)?;
            cmd_eval_papr(&config, system(eval.system), eval.model.as_deref(), &eval.common.out)?
        }
        Command::EvalPsd(eval) => {
            let config = load_config(&eval.common.config, eval.common.seed, None)?;
            cmd_eval_psd(&config, system(eval.system), eval.model.as_deref(), &eval.common.out)?
        }
    };
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    for o in &manifest.outputs {
        println!("{}  {}", o.sha256, o.path);
    }
    Ok(())
}

fn system(arg: SystemArg) -> System {
    match arg {
        SystemArg::Ae => System::Ae,
        SystemArg::Ofdm => System::Ofdm,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
