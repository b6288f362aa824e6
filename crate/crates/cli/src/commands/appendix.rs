use std::fmt::Write;

use anyhow::Result;
use clap::Args;
use phaseforge::appendixcheck::{deviation_sweep, hann_window, loglog_slope, mixed_signal, step_edge_demo, sweep_csv};
use serde::{Deserialize, Serialize};

use crate::config::{parse_list, usage};
use crate::output::Output;

pub const SLOPE_TARGET: f64 = 2.0;
pub const SLOPE_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AppendixArgs {
    /// Signal length.
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Frequency bin that is rotated.
    #[arg(long, default_value_t = 10)]
    pub f0: usize,

    /// Comma-separated rotations in radians (default: 9 log-spaced values
    /// over [0.025, 0.4]).
    #[arg(long)]
    pub etas: Option<String>,

    /// Rotation used for the step-edge demo.
    #[arg(long, default_value_t = 0.2)]
    pub step_eta: f64,

    #[arg(long, default_value_t = 3)]
    pub step_f0: usize,
}

pub fn default_etas() -> Vec<f64> {
    let (lo, hi) = (0.025f64.ln(), 0.4f64.ln());
    (0..9).map(|i| (lo + (hi - lo) * i as f64 / 8.0).exp()).collect()
}

pub fn run(args: &AppendixArgs, out: &Output) -> Result<()> {
    if args.n < 16 || args.n % 16 != 0 {
        return usage(format!("--n must be a positive multiple of 16, got {}", args.n));
    }
    let etas = match &args.etas {
        Some(s) => parse_list(s)?,
        None => default_etas(),
    };
    let points = deviation_sweep(&mixed_signal(args.n), args.f0, &etas, &hann_window(args.n / 8), args.n / 16)?;
    out.text("sweep.csv", &sweep_csv(&points))?;
    let slope = loglog_slope(&points)?;
    let pass = (slope - SLOPE_TARGET).abs() <= SLOPE_TOLERANCE;
    out.text(
        "slope.csv",
        &format!("slope,target,tolerance,pass\n{slope},{SLOPE_TARGET},{SLOPE_TOLERANCE},{pass}\n"),
    )?;
    let step = step_edge_demo(args.n, args.step_f0, args.step_eta)?;
    let mut csv = String::from("eta,local_phase_error,recovered_eta,residual\n");
    writeln!(csv, "{},{},{},{}", step.eta, step.local_phase_error, step.recovered_eta, step.residual)?;
    out.text("step.csv", &csv)?;
    log::info!("log-log slope {slope:.3}: {}", if pass { "pass" } else { "fail" });
    Ok(())
}
