use std::fmt::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use phaseforge::denoise::{degrade_phase_field, denoise_phase_field};
use phaseforge::dtcwt::Dtcwt;
use phaseforge::graph::ChildMap;
use phaseforge::model::PhaseGmm;
use phaseforge::numerics::io::load_image;
use phaseforge::numerics::{QualityScore, RealImage};
use phaseforge::{par, rng};
use serde::{Deserialize, Serialize};

use super::label;
use crate::config::{resolve_input, usage, CliError};
use crate::corpus::pixel_hash;
use crate::output::Output;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DenoiseArgs {
    /// Trained model (phase-gmm/1 JSON).
    #[arg(long)]
    pub model: PathBuf,

    /// Clean test images; must not be training images.
    #[arg(long = "image", required = true, num_args = 1..)]
    pub images: Vec<PathBuf>,

    /// Standard deviation of the local-phase noise, radians.
    #[arg(long)]
    pub sigma: f64,

    #[arg(long, default_value_t = 4)]
    pub levels: usize,
}

impl DenoiseArgs {
    pub fn resolve(&mut self) -> Result<()> {
        self.model = resolve_input(&self.model)?;
        self.images = self.images.iter().map(|p| resolve_input(p)).collect::<Result<_>>()?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return usage(format!("--sigma must be finite and >= 0, got {}", self.sigma));
        }
        Ok(())
    }
}

struct Outcome {
    degraded: RealImage,
    denoised: RealImage,
    deg: QualityScore,
    rec: QualityScore,
}

fn process(image: &RealImage, index: usize, args: &DenoiseArgs, model: &PhaseGmm, seed: u64) -> Result<Outcome> {
    if args.sigma == 0.0 {
        let q = QualityScore::of(image, image)?;
        return Ok(Outcome { degraded: image.clone(), denoised: image.clone(), deg: q, rec: q });
    }
    let t = Dtcwt::default();
    let p = t.forward(image, args.levels)?;
    let mut g = rng::substream(seed, "noise", index as u64);
    let (noisy, field) = degrade_phase_field(&p, args.sigma, &mut g)?;
    let degraded = t.inverse(&noisy)?;
    let est = denoise_phase_field(&noisy, &field, model, args.sigma * args.sigma, ChildMap::Dyadic)?;
    let denoised = t.inverse(&est)?;
    Ok(Outcome {
        deg: QualityScore::of(image, &degraded)?,
        rec: QualityScore::of(image, &denoised)?,
        degraded,
        denoised,
    })
}

pub fn run(args: &DenoiseArgs, seed: u64, out: &Output) -> Result<()> {
    let model = PhaseGmm::load(&args.model, false).with_context(|| format!("loading {}", args.model.display()))?;
    let mut images = Vec::with_capacity(args.images.len());
    for path in &args.images {
        let img = load_image(path).with_context(|| format!("decoding {}", path.display()))?;
        if model.meta.image_hashes.contains(&pixel_hash(&img)) {
            return Err(CliError::Guard(format!("{} was used to train the model", path.display())).into());
        }
        images.push(img);
    }
    let index: Vec<usize> = (0..images.len()).collect();
    let outcomes = par::map(&index, |&i| process(&images[i], i, args, &model, seed));
    let mut csv = String::from("image,psnr_deg,ssim_deg,psnr_rec,ssim_rec\n");
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let o = outcome?;
        let name = label(i, &args.images[i]);
        out.image(&format!("{name}_degraded.png"), &o.degraded)?;
        out.image(&format!("{name}_denoised.png"), &o.denoised)?;
        writeln!(csv, "{name},{},{},{},{}", o.deg.psnr, o.deg.ssim, o.rec.psnr, o.rec.ssim)?;
    }
    out.text("metrics.csv", &csv)
}
