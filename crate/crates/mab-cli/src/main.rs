use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mab_cli::{cmd_run, cmd_sim1, cmd_sim2, cmd_sweep, cmd_two_agent, load_config, Overrides};

/// Multi-armed bandit spectrum-access simulator.
#[derive(Parser)]
#[command(name = "mabsim", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo experiment from a JSON config file.
    Run(ConfigArgs),
    /// Alpha sweep over the config's grid (requires a `sweep` section).
    Sweep(ConfigArgs),
    /// Four heterogeneous channels: alpha sweep vs the naive benchmark.
    Sim1(SimArgs),
    /// Four Bernoulli channels: tuned UCB vs Thompson sampling.
    Sim2(SimArgs),
    /// Two policies sharing the config's channels with zero-reward collisions.
    TwoAgent(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo run count override.
    #[arg(long)]
    runs: Option<usize>,
    /// Horizon override.
    #[arg(long)]
    horizon: Option<usize>,
    /// Output directory for CSV files and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Pipe a single curve's CSV to stdout instead of writing files.
    #[arg(long)]
    stdout: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            runs: self.runs,
            horizon: self.horizon,
        }
    }
}

// Defaults for the canned simulations (desk scale; the full-size run
// counts stay a command-line knob).
const DEFAULT_SEED: u64 = 12345;
const SIM1_RUNS: usize = 10_000;
const SIM1_HORIZON: usize = 10_000;
const SIM2_RUNS: usize = 1_000;
const SIM2_HORIZON: usize = 100_000;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; anything else is
            // a usage error. Either way the text goes to stderr so
            // stdout stays clean for data.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            eprint!("{e}");
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Run(args) => with_config(args, |config, common| {
            cmd_run(config, &common.out, common.stdout)
        }),
        Command::Sweep(args) => with_config(args, |config, common| {
            reject_stdout(common)?;
            cmd_sweep(config, &common.out)
        }),
        Command::TwoAgent(args) => with_config(args, |config, common| {
            reject_stdout(common)?;
            cmd_two_agent(config, &common.out)
        }),
        Command::Sim1(args) => {
            let common = &args.common;
            reject_stdout(common).and_then(|()| {
                cmd_sim1(
                    common.seed.unwrap_or(DEFAULT_SEED),
                    common.runs.unwrap_or(SIM1_RUNS),
                    common.horizon.unwrap_or(SIM1_HORIZON),
                    &common.out,
                )
            })
        }
        Command::Sim2(args) => {
            let common = &args.common;
            reject_stdout(common).and_then(|()| {
                cmd_sim2(
                    common.seed.unwrap_or(DEFAULT_SEED),
                    common.runs.unwrap_or(SIM2_RUNS),
                    common.horizon.unwrap_or(SIM2_HORIZON),
                    &common.out,
                )
            })
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn with_config(
    args: &ConfigArgs,
    f: impl FnOnce(&mab_core::ExperimentConfig, &CommonArgs) -> Result<(), mab_cli::CliError>,
) -> Result<(), mab_cli::CliError> {
    let mut config = load_config(&args.config)?;
    args.common.overrides().apply(&mut config);
    config.validate().map_err(mab_cli::CliError::from)?;
    f(&config, &args.common)
}

fn reject_stdout(common: &CommonArgs) -> Result<(), mab_cli::CliError> {
    if common.stdout {
        return Err(mab_cli::CliError::Validation(
            "--stdout carries exactly one curve; this subcommand produces several files".into(),
        ));
    }
    Ok(())
}
