use std::fmt::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use phaseforge::dtcwt::FILTER_SET_ID;
use phaseforge::graph::{ChildMap, Selection};
use phaseforge::model::{
    average_congruency, cross_validate, em_fit, find_elbow, training_samples, EmConfig, SampleConfig, TrainingMeta,
};
use phaseforge::numerics::RealImage;
use phaseforge::rng;
use phaseforge::synth::texture_corpus;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{usage, DATA_ENV};
use crate::corpus::{pixel_hash, CorpusManifest, Normalization};
use crate::output::Output;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Directory of PGM/PNG training images.
    #[arg(long, env = DATA_ENV)]
    pub corpus: Option<PathBuf>,

    /// Train on this many built-in procedural textures instead of a corpus.
    #[arg(long)]
    pub synthetic: Option<usize>,

    /// Side of the square training crops.
    #[arg(long, default_value_t = 256)]
    pub size: usize,

    /// Stretch every crop to span [0, 1].
    #[arg(long)]
    pub normalize: bool,

    #[arg(long, default_value_t = 4)]
    pub levels: usize,

    /// Number of mixture components.
    #[arg(long, default_value_t = 10)]
    pub k: usize,

    /// Candidate range `lo..hi` (inclusive); K is then picked at the elbow
    /// of the cross-validated likelihood.
    #[arg(long)]
    pub k_range: Option<String>,

    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    /// Strongest coefficients kept per image (default size^2 / 64).
    #[arg(long)]
    pub count: Option<usize>,

    /// Keep this fraction of the detail coefficients per image instead.
    #[arg(long, conflicts_with = "count")]
    pub fraction: Option<f64>,

    /// Restrict to one orientation (0-based).
    #[arg(long)]
    pub orientation: Option<usize>,

    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,

    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Fit even with fewer than 50 samples per parameter.
    #[arg(long)]
    pub force: bool,

    #[arg(skip)]
    #[serde(default)]
    pub manifest: Option<CorpusManifest>,
}

impl TrainArgs {
    pub fn resolve(&mut self, seed: u64) -> Result<()> {
        if self.size == 0 {
            return usage("--size must be positive");
        }
        match (&self.synthetic, &self.corpus) {
            (Some(0), _) => usage("--synthetic needs at least one image"),
            (Some(_), _) => {
                self.corpus = None;
                Ok(())
            }
            (None, Some(root)) => {
                if self.manifest.is_none() {
                    let norm = if self.normalize { Normalization::MinMax } else { Normalization::None };
                    self.manifest = Some(CorpusManifest::scan(root, self.size, norm, seed)?);
                }
                Ok(())
            }
            (None, None) => usage(format!("give --corpus, --synthetic or set {DATA_ENV}")),
        }
    }

    fn selection(&self) -> Selection {
        match (self.fraction, self.count) {
            (Some(f), _) => Selection::Fraction(f),
            (None, Some(n)) => Selection::Count(n),
            (None, None) => Selection::Count(self.size * self.size / 64),
        }
    }
}

fn threshold_label(s: Selection) -> String {
    match s {
        Selection::Count(n) => format!("count:{n}"),
        Selection::Fraction(f) => format!("fraction:{f}"),
    }
}

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let parsed = text
        .split_once("..")
        .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)));
    match parsed {
        Some((lo, hi)) if lo >= 1 && hi >= lo + 3 => Ok((lo..=hi).collect()),
        _ => usage(format!("--k-range must look like 2..15 with at least 4 values, got {text:?}")),
    }
}

/// (name, full image, training crop) for every training image.
fn training_images(args: &TrainArgs, seed: u64) -> Result<Vec<(String, RealImage, RealImage)>> {
    if let Some(count) = args.synthetic {
        return Ok(texture_corpus(args.size, count, seed)
            .into_iter()
            .map(|(name, img)| (name, img.clone(), img))
            .collect());
    }
    let manifest = match &args.manifest {
        Some(m) => m,
        None => return usage("training corpus was not resolved"),
    };
    Ok(manifest.load()?.into_iter().map(|i| (i.name, i.source, i.crop)).collect())
}

pub fn run(args: &TrainArgs, seed: u64, out: &Output) -> Result<()> {
    let images = training_images(args, seed)?;
    let selection = args.selection();
    let crops: Vec<RealImage> = images.iter().map(|i| i.2.clone()).collect();
    let samples = training_samples(
        &crops,
        &SampleConfig {
            levels: args.levels,
            selection,
            child_map: ChildMap::Dyadic,
            orientation: args.orientation,
        },
    )?;
    log::info!("{} sub-trees from {} images", samples.len(), images.len());
    let em = EmConfig {
        max_iters: args.max_iters,
        tol: args.tol,
        seed: rng::stream(seed, "train").random(),
        force: args.force,
        ..EmConfig::default()
    };

    let k = match &args.k_range {
        Some(range) => {
            let ks = parse_range(range)?;
            let scores = cross_validate(&samples, &ks, args.folds, &em)?;
            let means: Vec<f64> = scores.iter().map(|s| s.mean).collect();
            let mut csv = String::from("k,mean_loglik,fold_min,fold_max\n");
            for s in &scores {
                let lo = s.per_fold.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = s.per_fold.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                writeln!(csv, "{},{},{},{}", s.k, s.mean, lo, hi)?;
            }
            out.text("elbow.csv", &csv)?;
            let k = find_elbow(&ks, &means)?;
            log::info!("elbow at K = {k}");
            k
        }
        None => args.k,
    };

    let fit = em_fit(&samples, k, &em)?;
    let mut model = fit.model;
    let mut hashes: Vec<String> = images.iter().flat_map(|i| [pixel_hash(&i.1), pixel_hash(&i.2)]).collect();
    hashes.sort();
    hashes.dedup();
    model.meta = TrainingMeta {
        image_count: images.len(),
        sample_count: samples.len(),
        threshold: threshold_label(selection),
        filter_set: FILTER_SET_ID.into(),
        levels: args.levels,
        seed,
        orientation: args.orientation,
        image_hashes: hashes,
    };
    out.text("model.json", &model.to_json()?)?;

    let b = fit.budget;
    let mut report = String::from("key,value\n");
    for (key, value) in [
        ("k", k.to_string()),
        ("images", images.len().to_string()),
        ("samples", b.n_samples.to_string()),
        ("n_params", b.n_params.to_string()),
        ("r_params", b.r_params.to_string()),
        ("iterations", fit.iterations.to_string()),
        ("converged", fit.converged.to_string()),
        ("final_mean_loglik", fit.trace.last().copied().unwrap_or(f64::NAN).to_string()),
        ("floor_events", fit.floor_events.to_string()),
    ] {
        writeln!(report, "{key},{value}")?;
    }
    out.text("train_report.csv", &report)?;

    let mut trace = String::from("iteration,mean_loglik\n");
    for (i, v) in fit.trace.iter().enumerate() {
        writeln!(trace, "{i},{v}")?;
    }
    out.text("em_trace.csv", &trace)?;

    let mut ag = String::from("component,weight,average_congruency\n");
    if model.dim() == phaseforge::graph::SUBTREE_DIM {
        for c in 0..model.k() {
            writeln!(ag, "{},{},{}", c, model.weights[c], average_congruency(&model, c)?)?;
        }
    }
    out.text("congruency.csv", &ag)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert!(parse_range("2..4").is_err());
        assert!(parse_range("0..9").is_err());
        assert!(parse_range("x").is_err());
    }
}
