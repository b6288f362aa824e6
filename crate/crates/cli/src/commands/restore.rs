use std::fmt::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use phaseforge::hqs::{hqs_restore, parse_kernel, DegradationOperator, HqsSchedule};
use phaseforge::model::PhaseGmm;
use phaseforge::numerics::io::load_image;
use phaseforge::numerics::{QualityScore, RealImage};
use phaseforge::rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{parse_list, resolve_input, usage};
use crate::output::Output;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RestoreArgs {
    /// Trained model (phase-gmm/1 JSON).
    #[arg(long)]
    pub model: PathBuf,

    /// Observed image (or the clean image with --simulate).
    #[arg(long)]
    pub image: PathBuf,

    /// Blur kernel as plain-text taps, one row per line; identity if omitted.
    #[arg(long)]
    pub kernel: Option<PathBuf>,

    /// Standard deviation of the observation noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,

    /// Comma-separated, strictly increasing coupling weights.
    #[arg(long)]
    pub alphas: Option<String>,

    #[arg(long, default_value_t = 20)]
    pub inner_iters: usize,

    #[arg(long, default_value_t = 3)]
    pub alternations: usize,

    #[arg(long, default_value_t = 4)]
    pub levels: usize,

    /// Treat --image as clean: blur it, add noise, restore and score.
    #[arg(long)]
    pub simulate: bool,

    /// Use the (Sigma + alpha I)^-1 (Sigma a + alpha mu) z step.
    #[arg(long)]
    pub printed_z: bool,
}

impl RestoreArgs {
    pub fn resolve(&mut self) -> Result<()> {
        self.model = resolve_input(&self.model)?;
        self.image = resolve_input(&self.image)?;
        if let Some(k) = &self.kernel {
            self.kernel = Some(resolve_input(k)?);
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return usage(format!("--noise must be positive, got {}", self.noise));
        }
        if let Some(a) = &self.alphas {
            parse_list(a)?;
        }
        Ok(())
    }

    fn schedule(&self) -> Result<HqsSchedule> {
        let mut s = HqsSchedule {
            inner_iters: self.inner_iters,
            alternations: self.alternations,
            levels: self.levels,
            printed_z_update: self.printed_z,
            ..HqsSchedule::default()
        }
        .with_noise_sigma(self.noise);
        if let Some(a) = &self.alphas {
            s.alphas = parse_list(a)?;
        }
        Ok(s)
    }
}

fn observe(x: &RealImage, h: &DegradationOperator, sigma: f64, seed: u64) -> Result<RealImage> {
    let mut g = rng::stream(seed, "noise");
    let normal = Normal::new(0.0, sigma)?;
    let mut y = h.apply(x);
    for v in y.data_mut() {
        *v += normal.sample(&mut g);
    }
    Ok(y)
}

pub fn run(args: &RestoreArgs, seed: u64, out: &Output) -> Result<()> {
    let model = PhaseGmm::load(&args.model, false).with_context(|| format!("loading {}", args.model.display()))?;
    let h = match &args.kernel {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            DegradationOperator::convolution(parse_kernel(&text)?)?
        }
        None => DegradationOperator::Identity,
    };
    let input = load_image(&args.image).with_context(|| format!("decoding {}", args.image.display()))?;
    let y = if args.simulate { observe(&input, &h, args.noise, seed)? } else { input.clone() };
    let result = hqs_restore(&y, &h, &model, &args.schedule()?)?;
    out.image("observed.png", &y)?;
    out.image("restored.png", &result.image)?;
    out.text("objective.csv", &result.objective_csv())?;
    if args.simulate {
        let mut csv = String::from("image,psnr,ssim\n");
        for (what, img) in [("observed", &y), ("restored", &result.image)] {
            let q = QualityScore::of(&input, img)?;
            writeln!(csv, "{what},{},{}", q.psnr, q.ssim)?;
        }
        out.text("metrics.csv", &csv)?;
    }
    Ok(())
}
