use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Subcommand;
use serde::{Deserialize, Serialize};

use crate::commands::{
    analyze::AnalyzeArgs, appendix::AppendixArgs, denoise::DenoiseArgs, restore::RestoreArgs,
    retrieve::RetrieveArgs, train::TrainArgs,
};

pub const RUN_FORMAT: &str = "phaseforge-run/1";
pub const DATA_ENV: &str = "PHASEFORGE_DATA";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("refused: {0}")]
    Guard(String),
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()).into())
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Fit a phase mixture model to a texture corpus.
    Train(TrainArgs),
    /// Perturb local phases with Gaussian noise and estimate them back.
    Denoise(DenoiseArgs),
    /// Paired HIO / LPHIO phase retrieval.
    Retrieve(RetrieveArgs),
    /// Strong/weak coefficient statistics and phase randomization.
    Analyze(AnalyzeArgs),
    /// Half-quadratic-splitting restoration of a blurred, noisy image.
    Restore(RestoreArgs),
    /// Check the first-order STFT perturbation law on a 1-D signal.
    AppendixCheck(AppendixArgs),
}

impl Command {
    /// Makes the command self-contained: absolute input paths and any
    /// derived inputs (such as the corpus manifest) filled in.
    pub fn resolve(&mut self, seed: u64) -> Result<()> {
        match self {
            Command::Train(a) => a.resolve(seed),
            Command::Denoise(a) => a.resolve(),
            Command::Retrieve(a) => a.resolve(),
            Command::Analyze(a) => a.resolve(),
            Command::Restore(a) => a.resolve(),
            Command::AppendixCheck(_) => Ok(()),
        }
    }
}

/// Contents of `run.json`: everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFile {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub command: Command,
}

impl RunFile {
    pub fn new(seed: u64, command: Command) -> Self {
        Self {
            format: RUN_FORMAT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            command,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: RunFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if file.format != RUN_FORMAT {
            return usage(format!("unsupported run file format {:?}", file.format));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Absolute path of an input file. Relative paths missing from the working
/// directory are looked up under `$PHASEFORGE_DATA`.
pub fn resolve_input(path: &Path) -> Result<PathBuf> {
    if path.exists() {
        return Ok(path.canonicalize()?);
    }
    if path.is_relative() {
        if let Some(root) = std::env::var_os(DATA_ENV) {
            let candidate = Path::new(&root).join(path);
            if candidate.exists() {
                return Ok(candidate.canonicalize()?);
            }
        }
    }
    usage(format!("input not found: {}", path.display()))
}

/// Comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: {s:?}")).into()))
        .collect()
}
