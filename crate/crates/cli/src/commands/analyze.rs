use std::fmt::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use phaseforge::dtcwt::Dtcwt;
use phaseforge::graph::{
    joint_histogram_pgm, low_energy_paths, max_frequency_sweep, path_threshold_for_fraction, randomize_paths,
    randomize_phase_local, strong_weak_statistics, sweep_csv, threshold_top_energy, Selection,
};
use phaseforge::model::{congruency_demo, marker_map, DemoConfig, PhaseGmm};
use phaseforge::numerics::io::load_image;
use phaseforge::numerics::{randomize_global_phase_fraction, QualityScore, RealImage};
use phaseforge::rng;
use phaseforge::synth::texture_corpus;
use serde::{Deserialize, Serialize};

use super::label;
use crate::config::{parse_list, resolve_input, usage};
use crate::output::Output;

const DEFAULT_SWEEP: &str = "0.07,0.08,0.09,0.1,0.11,0.12,0.13,0.14,0.15,0.16,0.17,0.18,0.19,0.2";

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[arg(long = "image", num_args = 1..)]
    #[serde(default)]
    pub images: Vec<PathBuf>,

    /// Analyze this many built-in textures instead of files.
    #[arg(long, conflicts_with = "images")]
    pub synthetic: Option<usize>,

    /// Side of the built-in textures.
    #[arg(long, default_value_t = 128)]
    pub size: usize,

    #[arg(long, default_value_t = 4)]
    pub levels: usize,

    /// Fraction of detail coefficients counted as strong.
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,

    /// Comma-separated strong fractions for the maximal-frequency sweep.
    #[arg(long, default_value = DEFAULT_SWEEP)]
    pub sweep: String,

    /// Model for the congruency marker maps.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

impl AnalyzeArgs {
    pub fn resolve(&mut self) -> Result<()> {
        self.images = self.images.iter().map(|p| resolve_input(p)).collect::<Result<_>>()?;
        if let Some(m) = &self.model {
            self.model = Some(resolve_input(m)?);
        }
        if self.images.is_empty() && !self.synthetic.is_some_and(|n| n > 0) {
            return usage("give --image or --synthetic");
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return usage("--fraction must be in (0, 1)");
        }
        parse_list(&self.sweep)?;
        Ok(())
    }

    fn inputs(&self, seed: u64) -> Result<Vec<(String, RealImage)>> {
        if let Some(n) = self.synthetic {
            return Ok(texture_corpus(self.size, n, seed));
        }
        self.images
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((label(i, p), load_image(p).with_context(|| format!("decoding {}", p.display()))?)))
            .collect()
    }
}

pub fn run(args: &AnalyzeArgs, seed: u64, out: &Output) -> Result<()> {
    let model = match &args.model {
        Some(p) => Some(PhaseGmm::load(p, false).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let sweep = parse_list(&args.sweep)?;
    let t = Dtcwt::default();
    let mut random_csv = String::from("image,experiment,psnr,ssim\n");
    let mut marker_csv = String::from("image,component,congruency,markers\n");
    for (i, (name, img)) in args.inputs(seed)?.iter().enumerate() {
        let p = t.forward(img, args.levels)?;
        let mask = threshold_top_energy(&p, Selection::Fraction(args.fraction))?;
        let report = strong_weak_statistics(&p, &mask)?;
        out.text(&format!("{name}_bands.csv"), &report.bands_csv())?;
        out.text(&format!("{name}_joints.csv"), &report.joints_csv())?;
        for j in &report.joints {
            let class = format!("{:?}", j.class).to_lowercase();
            out.image(&format!("{name}_joint_o{}_{class}.pgm", j.orientation + 1), &joint_histogram_pgm(j))?;
        }
        out.text(&format!("{name}_sweep.csv"), &sweep_csv(&max_frequency_sweep(&p, &sweep)?))?;

        let weak = 1.0 - args.fraction;
        let stream = |what: &str| rng::substream(seed, what, i as u64);
        let paths = low_energy_paths(&p, path_threshold_for_fraction(&p, weak)?);
        let experiments = [
            ("local_strong", t.inverse(&randomize_phase_local(&p, &mask, &mut stream("analyze-strong"))?)?),
            ("local_weak", t.inverse(&randomize_phase_local(&p, &mask.complement(), &mut stream("analyze-weak"))?)?),
            ("paths_weak", t.inverse(&randomize_paths(&p, &paths, &mut stream("analyze-paths"))?)?),
            ("global_weak", randomize_global_phase_fraction(img, weak, &mut stream("analyze-global"))?),
        ];
        for (what, rand_img) in &experiments {
            out.image(&format!("{name}_random_{what}.png"), rand_img)?;
            let q = QualityScore::of(img, rand_img)?;
            writeln!(random_csv, "{name},{what},{},{}", q.psnr, q.ssim)?;
        }

        if let Some(model) = &model {
            let cfg = DemoConfig { levels: args.levels, ..DemoConfig::default() };
            for m in congruency_demo(model, img, &cfg)? {
                out.image(
                    &format!("{name}_markers_c{}.pgm", m.component),
                    &marker_map(&m.markers, img.height(), img.width()),
                )?;
                writeln!(marker_csv, "{name},{},{},{}", m.component, m.congruency, m.markers.len())?;
            }
        }
    }
    out.text("randomization.csv", &random_csv)?;
    if model.is_some() {
        out.text("markers.csv", &marker_csv)?;
    }
    Ok(())
}
