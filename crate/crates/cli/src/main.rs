//! `phaseforge` command-line front end.

mod commands;
mod config;
mod corpus;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use config::{CliError, Command, RunFile};
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "phaseforge", version, about = "Local-phase priors for denoising, phase retrieval and restoration")]
struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Rerun the command recorded in a run.json.
    #[arg(long)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut file = match (cli.config, cli.command) {
        (Some(path), None) => {
            if cli.seed.is_some() {
                return Err(CliError::Usage("--seed cannot be combined with --config".into()).into());
            }
            RunFile::load(&path)?
        }
        (None, Some(command)) => RunFile::new(cli.seed.unwrap_or(0), command),
        (Some(_), Some(_)) => return Err(CliError::Usage("--config replaces the command; give one or the other".into()).into()),
        (None, None) => return Err(CliError::Usage("a command or --config is required".into()).into()),
    };
    configure_jobs(cli.jobs)?;
    file.command.resolve(file.seed)?;
    let out = Output::create(&cli.out)?;
    out.text("run.json", &file.to_json()?)?;
    commands::execute(&file.command, file.seed, &out)?;
    log::info!("wrote {}", cli.out.display());
    Ok(())
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    if jobs.is_some_and(|n| n > 1) {
        log::warn!("built without the parallel feature; --jobs is ignored");
    }
    Ok(())
}

/// 2 invalid input, 3 guard violation, 4 numerical abort.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Guard(_) => 3,
                CliError::Usage(_) => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<phaseforge::Error>() {
            return match e {
                phaseforge::Error::Numerical(_) | phaseforge::Error::NonFinite { .. } => 4,
                _ => 2,
            };
        }
    }
    2
}
