//! Phase retrieval from Fourier magnitude: hybrid input-output (HIO) and
//! its local-phase variant (LPHIO), which periodically denoises the
//! wavelet phase of the on-support image under the mixture prior.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::denoise::denoise_pyramid_phase;
use crate::dtcwt::Dtcwt;
use crate::error::{invalid, mismatch, Result};
use crate::graph::ChildMap;
use crate::model::PhaseGmm;
use crate::numerics::fft::hermitian_phase_field;
use crate::numerics::stats::mean_std;
use crate::numerics::{angle, psnr, ssim, ComplexImage, Fft2, QualityScore, RealImage};
use crate::par;
use crate::rng;

/// Floor applied to Fourier errors before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// Algorithm parameters shared by every run of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalParams {
    /// Iteration budget T.
    pub iterations: usize,
    /// Phase-estimation period N_est. Values above T disable estimation.
    pub n_est: usize,
    /// Initial noise variance of the estimation schedule.
    pub a: f64,
    /// Decay rate of the estimation schedule.
    pub b: f64,
    pub beta: f64,
    pub seed: u64,
    /// Wavelet depth of the estimation step; `None` picks 4 when the support
    /// side is at least 128 and 3 otherwise.
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub child_map: ChildMap,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        Self {
            iterations: 1500,
            n_est: 50,
            a: 2.0,
            b: 5.0,
            beta: 0.9,
            seed: 0,
            levels: None,
            child_map: ChildMap::Dyadic,
        }
    }
}

impl RetrievalParams {
    /// Noise variance `a * exp(-b * i / T)` assumed at iteration `i`.
    pub fn noise_variance(&self, i: usize) -> f64 {
        self.a * (-self.b * i as f64 / self.iterations as f64).exp()
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return invalid("iteration budget must be at least 1");
        }
        if self.n_est == 0 {
            return invalid("estimation period must be at least 1");
        }
        if !(self.a > 0.0 && self.a.is_finite()) || !(self.b >= 0.0 && self.b.is_finite()) {
            return invalid(format!("schedule needs a > 0 and b >= 0, got a = {}, b = {}", self.a, self.b));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return invalid(format!("beta must be in (0, 1], got {}", self.beta));
        }
        Ok(())
    }
}

/// One retrieval problem: the padded magnitude, the top-left support block
/// and the algorithm parameters.
#[derive(Debug, Clone)]
pub struct RetrievalConfig {
    pub magnitude: RealImage,
    /// Height and width of the support, anchored at the top-left corner.
    pub support: (usize, usize),
    pub params: RetrievalParams,
    /// Starting phase; drawn uniformly (Hermitian-symmetric) from the seed
    /// when `None`.
    pub initial_phase: Option<RealImage>,
}

impl RetrievalConfig {
    /// Problem for an `n x n` image zero-padded to `2n x 2n`.
    pub fn for_image(truth: &RealImage, params: RetrievalParams) -> Result<Self> {
        Ok(Self {
            magnitude: padded_magnitude(truth)?,
            support: truth.dims(),
            params,
            initial_phase: None,
        })
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (h, w) = self.magnitude.dims();
        let (sh, sw) = self.support;
        if sh == 0 || sw == 0 || sh > h || sw > w {
            return invalid(format!("support {sh}x{sw} does not fit in {h}x{w}"));
        }
        if let Some(p) = &self.initial_phase {
            if p.dims() != (h, w) {
                return mismatch(format!("{h}x{w}"), format!("{}x{}", p.height(), p.width()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalTrace {
    /// Fourier error after each iteration.
    pub errors: Vec<f64>,
    /// Final on-support estimate.
    pub image: RealImage,
    pub iterations: usize,
}

impl RetrievalTrace {
    pub fn final_error(&self) -> f64 {
        self.errors.last().copied().unwrap_or(f64::NAN)
    }

    pub fn errors_csv(&self) -> String {
        let mut s = String::from("iteration,fourier_error\n");
        for (i, e) in self.errors.iter().enumerate() {
            let _ = writeln!(s, "{},{e:e}", i + 1);
        }
        s
    }
}

/// Fourier magnitude of `image` zero-padded to twice its size.
pub fn padded_magnitude(image: &RealImage) -> Result<RealImage> {
    let (h, w) = image.dims();
    let padded = image.zero_pad(2 * h, 2 * w)?;
    Ok(Fft2::new(2 * h, 2 * w).forward_real(&padded).magnitude())
}

/// Squared L2 distance between `reference` and the spectrum magnitude of
/// `candidate`, over every bin.
pub fn fourier_error(reference: &RealImage, candidate: &RealImage) -> Result<f64> {
    reference.ensure_same_dims(candidate)?;
    let (h, w) = candidate.dims();
    Ok(spectrum_error(reference, &Fft2::new(h, w).forward_real(candidate)))
}

fn spectrum_error(reference: &RealImage, spectrum: &ComplexImage) -> f64 {
    reference
        .data()
        .iter()
        .zip(spectrum.data())
        .map(|(m, z)| (m - z.norm()).powi(2))
        .sum()
}

/// Baseline HIO.
pub fn hio_run(config: &RetrievalConfig) -> Result<RetrievalTrace> {
    run(config, None)
}

/// HIO with local-phase estimation every `n_est` iterations.
pub fn lphio_run(config: &RetrievalConfig, model: &PhaseGmm) -> Result<RetrievalTrace> {
    if model.dim() != crate::graph::SUBTREE_DIM {
        return invalid(format!("model dimension {} is not 10", model.dim()));
    }
    run(config, Some(model))
}

fn estimation_levels(params: &RetrievalParams, support: (usize, usize)) -> usize {
    params
        .levels
        .unwrap_or(if support.0.min(support.1) >= 128 { 4 } else { 3 })
}

fn run(config: &RetrievalConfig, model: Option<&PhaseGmm>) -> Result<RetrievalTrace> {
    config.validate()?;
    let p = &config.params;
    let (h, w) = config.magnitude.dims();
    let (sh, sw) = config.support;
    let levels = estimation_levels(p, config.support);
    if model.is_some() && p.n_est <= p.iterations && (sh % (1 << levels) != 0 || sw % (1 << levels) != 0) {
        return invalid(format!("support {sh}x{sw} is not divisible by 2^{levels}"));
    }
    let fft = Fft2::new(h, w);
    let transform = Dtcwt::default();
    let mag = &config.magnitude;
    let mut phase = match &config.initial_phase {
        Some(phi) => phi.clone(),
        None => {
            let mut g = rng::stream(p.seed, "retrieval-init");
            hermitian_phase_field(h, w, || g.random_range(-PI..PI))
        }
    };
    let inside = |r: usize, c: usize| r < sh && c < sw;
    let mut prev: Option<RealImage> = None;
    let mut errors = Vec::with_capacity(p.iterations);
    let mut projected = RealImage::zeros(h, w);
    for i in 1..=p.iterations {
        // step 1: known magnitude with the current phase, real part
        let spectrum = ComplexImage::from_fn(h, w, |r, c| Complex64::from_polar(mag.get(r, c), phase.get(r, c)));
        let estimate = fft.inverse(&spectrum).re();
        projected = RealImage::from_fn(h, w, |r, c| {
            let v = estimate.get(r, c);
            if inside(r, c) && v >= 0.0 { v } else { 0.0 }
        });
        errors.push(spectrum_error(mag, &fft.forward_real(&projected)));
        // steps 2-3: hybrid update on the violation set
        let before = prev.as_ref().unwrap_or(&estimate);
        let mut next = RealImage::from_fn(h, w, |r, c| {
            let v = estimate.get(r, c);
            if inside(r, c) && v >= 0.0 { v } else { before.get(r, c) - p.beta * v }
        });
        // step 4: local phase estimation on the support
        if let Some(model) = model {
            if i % p.n_est == 0 {
                let crop = next.crop(0, 0, sh, sw)?;
                let pyr = transform.forward(&crop, levels)?;
                let den = denoise_pyramid_phase(&pyr, model, p.noise_variance(i), p.child_map)?;
                next.paste(&transform.inverse(&den)?, 0, 0)?;
            }
        }
        // steps 5-6
        let spec = fft.forward_real(&next);
        phase = RealImage::from_fn(h, w, |r, c| angle(spec.get(r, c)));
        prev = Some(next);
    }
    if let Some(index) = errors.iter().position(|e| !e.is_finite()) {
        return Err(crate::error::Error::Numerical(format!("Fourier error became non-finite at iteration {}", index + 1)));
    }
    Ok(RetrievalTrace {
        errors,
        image: projected.crop(0, 0, sh, sw)?,
        iterations: p.iterations,
    })
}

/// Quality of a reconstruction against the truth and against its 180 degree
/// rotation, which has the same Fourier magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationScore {
    pub direct: QualityScore,
    pub rotated: QualityScore,
}

impl RotationScore {
    /// Best PSNR and best SSIM over both branches.
    pub fn best(&self) -> QualityScore {
        QualityScore {
            psnr: self.direct.psnr.max(self.rotated.psnr),
            ssim: self.direct.ssim.max(self.rotated.ssim),
        }
    }
}

pub fn score_reconstruction(truth: &RealImage, reconstruction: &RealImage) -> Result<RotationScore> {
    let flipped = truth.rotate180();
    Ok(RotationScore {
        direct: QualityScore {
            psnr: psnr(truth, reconstruction)?,
            ssim: ssim(truth, reconstruction)?,
        },
        rotated: QualityScore {
            psnr: psnr(&flipped, reconstruction)?,
            ssim: ssim(&flipped, reconstruction)?,
        },
    })
}

/// HIO and LPHIO results for one (image, initialization) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub image: usize,
    pub init: usize,
    pub error_hio: f64,
    pub error_lphio: f64,
    pub psnr_hio: f64,
    pub psnr_lphio: f64,
    pub ssim_hio: f64,
    pub ssim_lphio: f64,
    /// Log Fourier-error difference, LPHIO minus HIO.
    pub d_f: f64,
    /// PSNR difference, LPHIO minus HIO.
    pub d_p: f64,
    /// Set when either error hit [`LOG_FLOOR`].
    pub floored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub pairs: Vec<PairResult>,
    pub mean_d_f: f64,
    pub std_d_f: f64,
    pub mean_d_p: f64,
    pub std_d_p: f64,
}

/// Seed of initialization `init` for image `image`; both algorithms share it.
pub fn init_seed(seed: u64, image: usize, init: usize) -> u64 {
    rng::substream(seed, "retrieval-pair", ((image as u64) << 32) | init as u64).random()
}

/// Runs HIO and LPHIO from the same random initializations and compares
/// their final Fourier errors and rotation-resolved PSNR.
pub fn evaluate_pair(
    images: &[RealImage],
    params: &RetrievalParams,
    inits: usize,
    model: &PhaseGmm,
) -> Result<Evaluation> {
    if images.is_empty() || inits == 0 {
        return invalid("evaluation needs at least one image and one initialization");
    }
    let jobs: Vec<(usize, usize)> = (0..images.len())
        .flat_map(|k| (0..inits).map(move |j| (k, j)))
        .collect();
    let pairs = par::map(&jobs, |&(k, j)| run_pair(&images[k], params, k, j, model).map(|r| r.result));
    Evaluation::from_pairs(pairs.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Both traces of one (image, initialization) pair and their comparison.
#[derive(Debug, Clone)]
pub struct PairRun {
    pub result: PairResult,
    pub hio: RetrievalTrace,
    pub lphio: RetrievalTrace,
}

/// HIO and LPHIO on `truth` from initialization `init` of image `image`.
pub fn run_pair(truth: &RealImage, params: &RetrievalParams, image: usize, init: usize, model: &PhaseGmm) -> Result<PairRun> {
    let cfg = RetrievalConfig::for_image(
        truth,
        RetrievalParams {
            seed: init_seed(params.seed, image, init),
            ..params.clone()
        },
    )?;
    let hio = hio_run(&cfg)?;
    let lphio = lphio_run(&cfg, model)?;
    let sh = score_reconstruction(truth, &hio.image)?.best();
    let sl = score_reconstruction(truth, &lphio.image)?.best();
    let (eh, el) = (hio.final_error(), lphio.final_error());
    let result = PairResult {
        image,
        init,
        error_hio: eh,
        error_lphio: el,
        psnr_hio: sh.psnr,
        psnr_lphio: sl.psnr,
        ssim_hio: sh.ssim,
        ssim_lphio: sl.ssim,
        d_f: log_error_difference(el, eh),
        d_p: psnr_difference(sl.psnr, sh.psnr),
        floored: eh < LOG_FLOOR || el < LOG_FLOOR,
    };
    Ok(PairRun { result, hio, lphio })
}

/// `ln(max(a, floor)) - ln(max(b, floor))`.
pub fn log_error_difference(a: f64, b: f64) -> f64 {
    a.max(LOG_FLOOR).ln() - b.max(LOG_FLOOR).ln()
}

fn psnr_difference(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

impl Evaluation {
    pub fn from_pairs(pairs: Vec<PairResult>) -> Result<Self> {
        if pairs.is_empty() {
            return invalid("no pairs to summarize");
        }
        let (mean_d_f, std_d_f) = mean_std(&pairs.iter().map(|p| p.d_f).collect::<Vec<_>>());
        let (mean_d_p, std_d_p) = mean_std(&pairs.iter().map(|p| p.d_p).collect::<Vec<_>>());
        Ok(Self {
            pairs,
            mean_d_f,
            std_d_f,
            mean_d_p,
            std_d_p,
        })
    }

    pub fn pairs_csv(&self) -> String {
        let mut s = String::from(
            "image,init,error_hio,error_lphio,psnr_hio,psnr_lphio,ssim_hio,ssim_lphio,d_f,d_p,floored\n",
        );
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{},{},{},{},{},{},{}",
                p.image, p.init, p.error_hio, p.error_lphio, p.psnr_hio, p.psnr_lphio, p.ssim_hio, p.ssim_lphio,
                p.d_f, p.d_p, p.floored
            );
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "measure,mean,std\nd_f,{},{}\nd_p,{},{}\n",
            self.mean_d_f, self.std_d_f, self.mean_d_p, self.std_d_p
        )
    }

    /// Histograms of d_F and d_P with `bins` equal-width bins each.
    pub fn histogram_csv(&self, bins: usize) -> String {
        let mut s = String::from("measure,lo,hi,count\n");
        for (name, values) in [
            ("d_f", self.pairs.iter().map(|p| p.d_f).collect::<Vec<_>>()),
            ("d_p", self.pairs.iter().map(|p| p.d_p).collect::<Vec<_>>()),
        ] {
            for (lo, hi, n) in histogram(&values, bins) {
                let _ = writeln!(s, "{name},{lo},{hi},{n}");
            }
        }
        s
    }
}

fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in finite {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, n)| (lo + b as f64 * width, lo + (b + 1) as f64 * width, n))
        .collect()
}
