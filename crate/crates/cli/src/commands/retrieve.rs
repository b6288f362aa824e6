use std::fmt::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use phaseforge::hqs::parse_kernel;
use phaseforge::model::PhaseGmm;
use phaseforge::numerics::io::load_image;
use phaseforge::numerics::stats::mean_std;
use phaseforge::numerics::RealImage;
use phaseforge::par;
use phaseforge::retrieval::{
    hio_run, init_seed, log_error_difference, lphio_run, run_pair, Evaluation, RetrievalConfig, RetrievalParams,
};
use serde::{Deserialize, Serialize};

use super::label;
use crate::config::{resolve_input, usage};
use crate::output::Output;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RetrieveArgs {
    /// Trained model (phase-gmm/1 JSON).
    #[arg(long)]
    pub model: PathBuf,

    /// Ground-truth images; each is zero-padded to twice its size.
    #[arg(long = "image", num_args = 1.., required_unless_present = "magnitude")]
    #[serde(default)]
    pub images: Vec<PathBuf>,

    /// Fourier magnitude as a plain-text matrix, used instead of images.
    #[arg(long, conflicts_with = "images")]
    pub magnitude: Option<PathBuf>,

    /// Support `HxW` at the top-left corner (default: half of each side).
    #[arg(long, requires = "magnitude")]
    pub support: Option<String>,

    /// Iteration budget T.
    #[arg(long, default_value_t = 1500)]
    pub iterations: usize,

    /// Phase-estimation period.
    #[arg(long, default_value_t = 50)]
    pub n_est: usize,

    /// Initial noise variance of the estimation schedule.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,

    /// Decay rate of the estimation schedule.
    #[arg(long, default_value_t = 5.0)]
    pub b: f64,

    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,

    /// Random initializations per image.
    #[arg(long, default_value_t = 3)]
    pub inits: usize,

    /// Wavelet depth of the estimation step (default 4 for supports of at
    /// least 128, else 3).
    #[arg(long)]
    pub levels: Option<usize>,

    /// Bins of the d_F / d_P histograms.
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

impl RetrieveArgs {
    pub fn resolve(&mut self) -> Result<()> {
        self.model = resolve_input(&self.model)?;
        self.images = self.images.iter().map(|p| resolve_input(p)).collect::<Result<_>>()?;
        if let Some(m) = &self.magnitude {
            self.magnitude = Some(resolve_input(m)?);
        }
        if self.images.is_empty() && self.magnitude.is_none() {
            return usage("give --image or --magnitude");
        }
        if self.inits == 0 {
            return usage("--inits must be at least 1");
        }
        Ok(())
    }

    fn params(&self, seed: u64) -> RetrievalParams {
        RetrievalParams {
            iterations: self.iterations,
            n_est: self.n_est,
            a: self.a,
            b: self.b,
            beta: self.beta,
            seed,
            levels: self.levels,
            ..RetrievalParams::default()
        }
    }
}

fn parse_support(text: &str) -> Result<(usize, usize)> {
    match text.split_once(['x', 'X']).map(|(h, w)| (h.trim().parse(), w.trim().parse())) {
        Some((Ok(h), Ok(w))) => Ok((h, w)),
        _ => usage(format!("--support must look like 64x64, got {text:?}")),
    }
}

pub fn run(args: &RetrieveArgs, seed: u64, out: &Output) -> Result<()> {
    let model = PhaseGmm::load(&args.model, false).with_context(|| format!("loading {}", args.model.display()))?;
    match &args.magnitude {
        Some(path) => run_magnitude(args, path, &model, seed, out),
        None => run_images(args, &model, seed, out),
    }
}

fn run_images(args: &RetrieveArgs, model: &PhaseGmm, seed: u64, out: &Output) -> Result<()> {
    let images = args
        .images
        .iter()
        .map(|p| load_image(p).with_context(|| format!("decoding {}", p.display())))
        .collect::<Result<Vec<RealImage>>>()?;
    let params = args.params(seed);
    let jobs: Vec<(usize, usize)> = (0..images.len()).flat_map(|k| (0..args.inits).map(move |j| (k, j))).collect();
    let runs = par::map(&jobs, |&(k, j)| run_pair(&images[k], &params, k, j, model));
    let mut pairs = Vec::with_capacity(runs.len());
    for run in runs {
        let run = run?;
        let r = &run.result;
        let stem = format!("{}_init{}", label(r.image, &args.images[r.image]), r.init);
        out.text(&format!("trace_{stem}_hio.csv"), &run.hio.errors_csv())?;
        out.text(&format!("trace_{stem}_lphio.csv"), &run.lphio.errors_csv())?;
        out.image(&format!("recon_{stem}_hio.png"), &run.hio.image)?;
        out.image(&format!("recon_{stem}_lphio.png"), &run.lphio.image)?;
        pairs.push(run.result);
    }
    let ev = Evaluation::from_pairs(pairs)?;
    out.text("pairs.csv", &ev.pairs_csv())?;
    out.text("summary.csv", &ev.summary_csv())?;
    out.text("histogram.csv", &ev.histogram_csv(args.bins))?;
    log::info!("mean d_F {:.4}, mean d_P {:.4}", ev.mean_d_f, ev.mean_d_p);
    Ok(())
}

fn run_magnitude(args: &RetrieveArgs, path: &PathBuf, model: &PhaseGmm, seed: u64, out: &Output) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let magnitude = parse_kernel(&text)?;
    let support = match &args.support {
        Some(s) => parse_support(s)?,
        None => (magnitude.height() / 2, magnitude.width() / 2),
    };
    let inits: Vec<usize> = (0..args.inits).collect();
    let runs = par::map(&inits, |&j| -> phaseforge::Result<_> {
        let cfg = RetrievalConfig {
            magnitude: magnitude.clone(),
            support,
            params: args.params(init_seed(seed, 0, j)),
            initial_phase: None,
        };
        Ok((hio_run(&cfg)?, lphio_run(&cfg, model)?))
    });
    let mut csv = String::from("init,error_hio,error_lphio,d_f\n");
    let mut d_f = Vec::new();
    for (j, run) in runs.into_iter().enumerate() {
        let (hio, lp) = run?;
        out.text(&format!("trace_init{j}_hio.csv"), &hio.errors_csv())?;
        out.text(&format!("trace_init{j}_lphio.csv"), &lp.errors_csv())?;
        out.image(&format!("recon_init{j}_hio.png"), &hio.image)?;
        out.image(&format!("recon_init{j}_lphio.png"), &lp.image)?;
        let d = log_error_difference(lp.final_error(), hio.final_error());
        writeln!(csv, "{j},{:e},{:e},{d}", hio.final_error(), lp.final_error())?;
        d_f.push(d);
    }
    out.text("pairs.csv", &csv)?;
    let (mean, std) = mean_std(&d_f);
    out.text("summary.csv", &format!("measure,mean,std\nd_f,{mean},{std}\n"))
}
