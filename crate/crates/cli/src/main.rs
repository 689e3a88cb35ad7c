use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use molsig_cli::{CliError, Experiment, Format, RunConfig};

/// Signal distortion of absorbing molecular receivers.
#[derive(Parser, Debug)]
#[command(name = "molsig", version)]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,

    /// TOML run configuration; built-in nominal values when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Monte Carlo trials per period (validate) or draws (distributions).
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.trials {
        cfg.validate.trials = n;
        cfg.distributions.draws = n;
    }
    if let Some(out) = cli.out {
        cfg.output.path = Some(out);
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }

    let out = molsig_cli::run(cli.experiment, &cfg, cli.threads)?;
    molsig_cli::write_output(&out, cfg.output.format, cfg.output.path.as_deref())?;
    match out.table.failure() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("molsig: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
