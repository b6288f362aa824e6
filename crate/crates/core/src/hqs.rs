//! Half-quadratic-splitting restoration under the phase prior.
//!
//! The objective is `beta |H W^-1 w - y|^2 + alpha |a_w - z|^2 - log P(z)`
//! where `w` are wavelet coefficients, `a_w` their detail phases and `z` an
//! auxiliary phase field. Stages run with increasing `alpha`; each stage
//! alternates a projected-gradient `w` step and a closed-form `z` step.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::denoise::{phase_field, PhaseField};
use crate::dtcwt::{ComplexPyramid, Dtcwt};
use crate::error::{invalid, Error, Result};
use crate::graph::{neighborhood_with_phases, ChildMap, NodeId, SLOT_CENTER};
use crate::model::PhaseGmm;
use crate::numerics::{wrapped_diff, RealImage};
use crate::par;

/// Known linear degradation with periodic boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DegradationOperator {
    Identity,
    /// Circular convolution; tap `(i, j)` sits at offset
    /// `(i - kh / 2, j - kw / 2)`.
    Convolution { kernel: RealImage },
}

impl DegradationOperator {
    pub fn convolution(kernel: RealImage) -> Result<Self> {
        if kernel.is_empty() {
            return invalid("kernel is empty");
        }
        if let Some(index) = kernel.data().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self::Convolution { kernel })
    }

    /// Normalized separable Gaussian kernel of odd `size`.
    pub fn gaussian_blur(size: usize, sigma: f64) -> Result<Self> {
        if size % 2 == 0 || !(sigma > 0.0) {
            return invalid(format!("blur needs odd size and sigma > 0, got {size}, {sigma}"));
        }
        let half = (size / 2) as f64;
        let taps: Vec<f64> = (0..size).map(|i| (-(i as f64 - half).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
        let s: f64 = taps.iter().sum();
        Self::convolution(RealImage::from_fn(size, size, |r, c| taps[r] * taps[c] / (s * s)))
    }

    pub fn apply(&self, x: &RealImage) -> RealImage {
        self.filter(x, false)
    }

    pub fn adjoint(&self, x: &RealImage) -> RealImage {
        self.filter(x, true)
    }

    fn filter(&self, x: &RealImage, adjoint: bool) -> RealImage {
        let kernel = match self {
            Self::Identity => return x.clone(),
            Self::Convolution { kernel } => kernel,
        };
        let (h, w) = x.dims();
        let (kh, kw) = kernel.dims();
        let (ch, cw) = ((kh / 2) as isize, (kw / 2) as isize);
        let sign = if adjoint { 1 } else { -1 };
        let rows = par::map_range(h, |r| {
            (0..w)
                .map(|c| {
                    let mut acc = 0.0;
                    for i in 0..kh {
                        for j in 0..kw {
                            let rr = (r as isize + sign * (i as isize - ch)).rem_euclid(h as isize) as usize;
                            let cc = (c as isize + sign * (j as isize - cw)).rem_euclid(w as isize) as usize;
                            acc += kernel.get(i, j) * x.get(rr, cc);
                        }
                    }
                    acc
                })
                .collect::<Vec<f64>>()
        });
        RealImage::new(h, w, rows.into_iter().flatten().collect()).expect("filter output has image size")
    }
}

/// Parses a kernel from plain text: one row per line, taps separated by
/// whitespace or commas. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_kernel(text: &str) -> Result<RealImage> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Format(format!("kernel line {}: {t:?}: {e}", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let width = rows.first().map_or(0, Vec::len);
    if width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(Error::Format("kernel rows must be non-empty and equally long".into()));
    }
    RealImage::new(rows.len(), width, rows.concat())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HqsSchedule {
    /// Coupling weights, strictly increasing.
    pub alphas: Vec<f64>,
    /// Fidelity weight `1 / (2 sigma_n^2)`.
    pub beta_fidelity: f64,
    /// Initial gradient step; halved on fidelity increase.
    pub lambda: f64,
    /// Gradient steps per w update.
    pub inner_iters: usize,
    /// w/z alternations per stage.
    pub alternations: usize,
    pub levels: usize,
    #[serde(default)]
    pub child_map: ChildMap,
    /// Use `(Sigma + alpha I)^-1 (Sigma a_w + alpha mu)` for the z step
    /// instead of the minimizer of the stage objective.
    #[serde(default)]
    pub printed_z_update: bool,
}

impl Default for HqsSchedule {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 4.0, 16.0, 64.0],
            beta_fidelity: 1.0 / (2.0 * 0.01f64.powi(2)),
            lambda: 1.0,
            inner_iters: 20,
            alternations: 3,
            levels: 4,
            child_map: ChildMap::Dyadic,
            printed_z_update: false,
        }
    }
}

impl HqsSchedule {
    pub fn with_noise_sigma(mut self, sigma: f64) -> Self {
        self.beta_fidelity = 1.0 / (2.0 * sigma * sigma);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return invalid("alphas must be positive and finite");
        }
        if self.alphas.windows(2).any(|p| p[1] <= p[0]) {
            return invalid("alphas must be strictly increasing");
        }
        if !(self.lambda > 0.0) || !(self.beta_fidelity > 0.0) || !self.beta_fidelity.is_finite() {
            return invalid("lambda and beta_fidelity must be positive");
        }
        if self.inner_iters == 0 || self.alternations == 0 || self.levels == 0 {
            return invalid("inner_iters, alternations and levels must be at least 1");
        }
        Ok(())
    }
}

/// `|H W^-1 w - y|^2`.
pub fn fidelity(t: &Dtcwt, w: &ComplexPyramid, y: &RealImage, h: &DegradationOperator) -> Result<f64> {
    let r = h.apply(&t.inverse(w)?);
    Ok(r.data().iter().zip(y.data()).map(|(a, b)| (a - b).powi(2)).sum())
}

/// Gradient of [`fidelity`], with the forward transform standing in for
/// the adjoint of synthesis.
pub fn fidelity_gradient(
    t: &Dtcwt,
    w: &ComplexPyramid,
    y: &RealImage,
    h: &DegradationOperator,
) -> Result<ComplexPyramid> {
    let x = t.inverse(w)?;
    let hx = h.apply(&x);
    let r = RealImage::from_fn(hx.height(), hx.width(), |i, j| 2.0 * (hx.get(i, j) - y.get(i, j)));
    t.forward(&h.adjoint(&r), w.num_levels())
}

/// `w - step * g` over details and lowpass.
fn step(w: &ComplexPyramid, g: &ComplexPyramid, lambda: f64) -> ComplexPyramid {
    let mut out = w.clone();
    for (lo, lg) in out.levels.iter_mut().zip(&g.levels) {
        for (bo, bg) in lo.bands.iter_mut().zip(&lg.bands) {
            for (a, b) in bo.data_mut().iter_mut().zip(bg.data()) {
                *a -= lambda * b;
            }
        }
    }
    for (a, b) in out.lowpass.data_mut().iter_mut().zip(g.lowpass.data()) {
        *a -= lambda * b;
    }
    out
}

/// Sets every detail phase to `z`, keeping magnitudes.
pub fn enforce_phase(w: &ComplexPyramid, z: &PhaseField) -> ComplexPyramid {
    let mut out = w.clone();
    for (lvl, zl) in out.levels.iter_mut().zip(z) {
        for (band, zb) in lvl.bands.iter_mut().zip(zl) {
            for (c, phi) in band.data_mut().iter_mut().zip(zb.data()) {
                *c = Complex64::from_polar(c.norm(), *phi);
            }
        }
    }
    out
}

/// Result of a w update.
#[derive(Debug, Clone)]
pub struct WStep {
    pub w: ComplexPyramid,
    /// Fidelity after phase enforcement and after each inner iteration.
    pub fidelity: Vec<f64>,
    /// Step size that was last accepted.
    pub lambda: f64,
}

const MAX_HALVINGS: usize = 40;

/// Projected gradient descent on the fidelity with the detail phases held
/// at `z`. Steps that would raise the fidelity are halved until they do
/// not; if none is found the iterate is kept.
pub fn w_update(
    t: &Dtcwt,
    w: &ComplexPyramid,
    y: &RealImage,
    h: &DegradationOperator,
    z: &PhaseField,
    lambda: f64,
    inner_iters: usize,
) -> Result<WStep> {
    let mut w = enforce_phase(w, z);
    let mut f = fidelity(t, &w, y, h)?;
    let mut trace = vec![f];
    let mut lam = lambda;
    for _ in 0..inner_iters {
        let g = fidelity_gradient(t, &w, y, h)?;
        let mut trial = lam;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = enforce_phase(&step(&w, &g, trial), z);
            let fc = fidelity(t, &cand, y, h)?;
            if fc <= f {
                accepted = Some((cand, fc));
                break;
            }
            trial *= 0.5;
        }
        if let Some((cand, fc)) = accepted {
            w = cand;
            f = fc;
            lam = trial;
        }
        trace.push(f);
    }
    if !f.is_finite() || f > 10.0 * trace[0].max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "fidelity grew from {} to {f} over one w update",
            trace[0]
        )));
    }
    Ok(WStep { w, fidelity: trace, lambda: lam })
}

/// Component chosen for the neighbourhood of every detail coefficient,
/// indexed like a [`PhaseField`].
pub fn select_components(a_w: &PhaseField, pyramid: &ComplexPyramid, model: &PhaseGmm, map: ChildMap) -> Vec<Vec<Vec<usize>>> {
    pyramid
        .levels
        .iter()
        .enumerate()
        .map(|(li, lvl)| {
            (0..lvl.bands.len())
                .map(|o| {
                    let (bh, bw) = lvl.bands[o].dims();
                    par::map_range(bh * bw, |i| {
                        let t = neighborhood_with_phases(pyramid, a_w, NodeId::new(li + 1, o, i / bw, i % bw), map);
                        let mut lj = vec![0.0; model.k()];
                        model.log_joint(&t.phases, 0.0, Some(&t.present), &mut lj);
                        argmax(&lj)
                    })
                })
                .collect()
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// Minimizer of `alpha (a - z)^2 + (z - mu)^2 / (2 var)` over `z`.
pub fn z_closed_form(a: f64, mu: f64, var: f64, alpha: f64) -> f64 {
    (2.0 * alpha * var * a + mu) / (2.0 * alpha * var + 1.0)
}

/// The alternative closed form `(var a + alpha mu) / (var + alpha)`.
pub fn z_printed_form(a: f64, mu: f64, var: f64, alpha: f64) -> f64 {
    (var * a + alpha * mu) / (var + alpha)
}

/// MAP z step: per coefficient, pick the most probable component of its
/// neighbourhood and solve the single-Gaussian problem for the centre slot.
/// Phase differences are measured on the circle, so `a_w` may be wrapped.
pub fn z_update(
    a_w: &PhaseField,
    pyramid: &ComplexPyramid,
    model: &PhaseGmm,
    alpha: f64,
    map: ChildMap,
    printed: bool,
) -> Result<(PhaseField, Vec<Vec<Vec<usize>>>)> {
    if model.dim() != crate::graph::SUBTREE_DIM {
        return invalid(format!("model dimension {} is not 10", model.dim()));
    }
    let ks = select_components(a_w, pyramid, model, map);
    Ok((z_given_components(a_w, &ks, model, alpha, printed)?, ks))
}

/// z step for components already chosen.
pub fn z_given_components(
    a_w: &PhaseField,
    ks: &[Vec<Vec<usize>>],
    model: &PhaseGmm,
    alpha: f64,
    printed: bool,
) -> Result<PhaseField> {
    if !(alpha > 0.0) {
        return invalid(format!("alpha must be > 0, got {alpha}"));
    }
    Ok(a_w
        .iter()
        .zip(ks)
        .map(|(al, kl)| {
            al.iter()
                .zip(kl)
                .map(|(ab, kb)| {
                    let mut out = ab.clone();
                    for (v, &k) in out.data_mut().iter_mut().zip(kb) {
                        let mu = model.means[k][SLOT_CENTER];
                        let var = model.variances[k][SLOT_CENTER];
                        // move a onto the branch nearest the mean
                        let a = mu + wrapped_diff(*v, mu);
                        *v = if printed {
                            z_printed_form(a, mu, var, alpha)
                        } else {
                            z_closed_form(a, mu, var, alpha)
                        };
                    }
                    out
                })
                .collect()
        })
        .collect())
}

/// Coupling and prior part of the stage objective for given components.
pub fn phase_objective(a_w: &PhaseField, z: &PhaseField, ks: &[Vec<Vec<usize>>], model: &PhaseGmm, alpha: f64) -> f64 {
    let mut total = 0.0;
    for ((al, zl), kl) in a_w.iter().zip(z).zip(ks) {
        for ((ab, zb), kb) in al.iter().zip(zl).zip(kl) {
            for ((&a, &zz), &k) in ab.data().iter().zip(zb.data()).zip(kb) {
                let mu = model.means[k][SLOT_CENTER];
                let var = model.variances[k][SLOT_CENTER];
                let d = wrapped_diff(a, zz);
                let e = zz - mu;
                total += alpha * d * d + 0.5 * e * e / var;
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub alpha: f64,
    pub alternation: usize,
    pub fidelity: f64,
    /// `beta * fidelity + alpha |a_w - z|^2 + prior`, with the stage's
    /// components.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct HqsResult {
    pub image: RealImage,
    pub records: Vec<StageRecord>,
}

impl HqsResult {
    pub fn objective_csv(&self) -> String {
        let mut s = String::from("stage,alpha,alternation,fidelity,objective\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{},{:e},{:e}", r.stage, r.alpha, r.alternation, r.fidelity, r.objective);
        }
        s
    }
}

fn coupling(a_w: &PhaseField, z: &PhaseField) -> f64 {
    a_w.iter()
        .zip(z)
        .flat_map(|(al, zl)| al.iter().zip(zl))
        .flat_map(|(ab, zb)| ab.data().iter().zip(zb.data()))
        .map(|(&a, &zz)| wrapped_diff(a, zz).powi(2))
        .sum()
}

/// Phase target a fraction `t` of the way from `a_w` to `z`.
fn partial_target(a_w: &PhaseField, z: &PhaseField, t: f64) -> PhaseField {
    a_w.iter()
        .zip(z)
        .map(|(al, zl)| {
            al.iter()
                .zip(zl)
                .map(|(ab, zb)| RealImage::from_fn(ab.height(), ab.width(), |r, c| {
                    ab.get(r, c) + t * wrapped_diff(zb.get(r, c), ab.get(r, c))
                }))
                .collect()
        })
        .collect()
}

const MAX_PHASE_HALVINGS: usize = 10;

/// Restores `x` from `y = H x + n`, starting from the coefficients of `y`.
///
/// Components are chosen once per stage from the current phases. The w
/// step first tries the full projection onto `z`; while that raises
/// `beta |H W^-1 w - y|^2 + alpha |a_w - z|^2` it retries with the phase
/// target moved only part of the way, and keeps `w` if nothing helps.
pub fn hqs_restore(y: &RealImage, h: &DegradationOperator, model: &PhaseGmm, schedule: &HqsSchedule) -> Result<HqsResult> {
    schedule.validate()?;
    if model.dim() != crate::graph::SUBTREE_DIM {
        return invalid(format!("model dimension {} is not 10", model.dim()));
    }
    let t = Dtcwt::default();
    let beta = schedule.beta_fidelity;
    let mut w = t.forward(y, schedule.levels)?;
    let mut lambda = schedule.lambda;
    let mut records = Vec::new();
    for (stage, &alpha) in schedule.alphas.iter().enumerate() {
        let a_w = phase_field(&w);
        let ks = select_components(&a_w, &w, model, schedule.child_map);
        let mut z = z_given_components(&a_w, &ks, model, alpha, schedule.printed_z_update)?;
        let mut fid = fidelity(&t, &w, y, h)?;
        for alt in 0..schedule.alternations {
            let a_w = phase_field(&w);
            let current = beta * fid + alpha * coupling(&a_w, &z);
            let mut frac = 1.0;
            for _ in 0..MAX_PHASE_HALVINGS {
                let target = if frac == 1.0 { z.clone() } else { partial_target(&a_w, &z, frac) };
                let ws = w_update(&t, &w, y, h, &target, lambda, schedule.inner_iters)?;
                let f = *ws.fidelity.last().expect("trace is never empty");
                if beta * f + alpha * coupling(&phase_field(&ws.w), &z) <= current {
                    w = ws.w;
                    fid = f;
                    // let the step grow back after a run of halvings
                    lambda = (ws.lambda * 2.0).min(schedule.lambda);
                    break;
                }
                frac *= 0.5;
            }
            let a_w = phase_field(&w);
            z = z_given_components(&a_w, &ks, model, alpha, schedule.printed_z_update)?;
            records.push(StageRecord {
                stage,
                alpha,
                alternation: alt,
                fidelity: fid,
                objective: beta * fid + phase_objective(&a_w, &z, &ks, model, alpha),
            });
        }
    }
    Ok(HqsResult {
        image: t.inverse(&w)?,
        records,
    })
}
