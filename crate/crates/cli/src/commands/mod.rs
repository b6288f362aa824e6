pub mod analyze;
pub mod appendix;
pub mod denoise;
pub mod restore;
pub mod retrieve;
pub mod train;

use std::path::Path;

use anyhow::Result;

use crate::config::Command;
use crate::output::Output;

pub fn execute(command: &Command, seed: u64, out: &Output) -> Result<()> {
    match command {
        Command::Train(a) => train::run(a, seed, out),
        Command::Denoise(a) => denoise::run(a, seed, out),
        Command::Retrieve(a) => retrieve::run(a, seed, out),
        Command::Analyze(a) => analyze::run(a, seed, out),
        Command::Restore(a) => restore::run(a, seed, out),
        Command::AppendixCheck(a) => appendix::run(a, out),
    }
}

/// `NN-stem`, unique per input position.
fn label(index: usize, path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{index:02}-{stem}")
}
