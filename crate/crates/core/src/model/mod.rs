//! Diagonal-covariance Gaussian mixture over sub-tree phase vectors.

mod cv;
mod demo;
mod em;
mod train;

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, find_elbow, fold_partition, CvScore};
pub use demo::{congruency_demo, marker_map, ComponentMarkers, DemoConfig, MARKER_THRESHOLD};
pub use em::{em_fit, EmConfig, FitReport, TrainingBudget, MIN_R_PARAMS, VARIANCE_FLOOR};
pub use train::{training_samples, SampleConfig};

use crate::error::{invalid, Error, Result};
use crate::graph::SUBTREE_DIM;
use crate::numerics::io::write_atomic;

pub const MODEL_FORMAT: &str = "phase-gmm/1";

/// Row-major set of equal-length sample vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
}

impl SampleSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return invalid(format!("{} values do not form rows of {dim}", data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return crate::error::mismatch(dim, r.len());
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { dim: self.dim, data }
    }
}

/// Provenance stored with a trained model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub image_count: usize,
    pub sample_count: usize,
    /// Human-readable energy threshold, e.g. `count:1024` or `fraction:0.2`.
    pub threshold: String,
    pub filter_set: String,
    pub levels: usize,
    pub seed: u64,
    /// Orientation the model was restricted to, if any (0-based).
    #[serde(default)]
    pub orientation: Option<usize>,
    /// SHA-256 of each training image's pixel data, hex encoded.
    #[serde(default)]
    pub image_hashes: Vec<String>,
}

/// Gaussian mixture with diagonal covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGmm {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    #[serde(rename = "K")]
    k: usize,
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    diag_covariances: Vec<Vec<f64>>,
    training_meta: TrainingMeta,
}

/// `ln N(x; mu, diag(var))`.
#[inline]
pub fn log_normal_diag(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&xi, &mi), &vi) in x.iter().zip(mean).zip(var) {
        let d = xi - mi;
        acc += (2.0 * PI * vi).ln() + d * d / vi;
    }
    -0.5 * acc
}

/// Normalizes log-weights in place into probabilities; returns the
/// log-sum-exp. Entries of `-inf` become 0.
pub fn softmax_in_place(logw: &mut [f64]) -> f64 {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let u = 1.0 / logw.len() as f64;
        logw.iter_mut().for_each(|v| *v = u);
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    for v in logw.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    logw.iter_mut().for_each(|v| *v /= sum);
    max + sum.ln()
}

impl PhaseGmm {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        let model = Self {
            weights,
            means,
            variances,
            meta: TrainingMeta::default(),
        };
        model.validate(true)?;
        Ok(model)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Checks the structural invariants; `any_dim` lifts the dim = 10 rule.
    pub fn validate(&self, any_dim: bool) -> Result<()> {
        let k = self.weights.len();
        if k == 0 {
            return invalid("model has no components");
        }
        if self.means.len() != k || self.variances.len() != k {
            return invalid("weights, means and covariances disagree on K");
        }
        let dim = self.dim();
        if dim == 0 || self.means.iter().chain(&self.variances).any(|v| v.len() != dim) {
            return invalid("component vectors disagree on dimension");
        }
        if !any_dim && dim != SUBTREE_DIM {
            return invalid(format!("model dimension {dim} is not {SUBTREE_DIM}"));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return invalid("mixture weights must be finite and nonnegative");
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("mixture weights sum to {total}"));
        }
        if self.means.iter().flatten().any(|m| !m.is_finite()) {
            return invalid("non-finite component mean");
        }
        if self.variances.iter().flatten().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return invalid("component variances must be finite and positive");
        }
        Ok(())
    }

    /// `ln(pi_k) + ln N(x; mu_k, Sigma_k + extra I)` restricted to the
    /// coordinates where `present` is true (all when `None`).
    pub fn log_joint(&self, x: &[f64], extra_var: f64, present: Option<&[bool]>, out: &mut [f64]) {
        for k in 0..self.k() {
            let (m, v) = (&self.means[k], &self.variances[k]);
            let mut acc = 0.0;
            for d in 0..x.len() {
                if present.is_none_or(|p| p[d]) {
                    let var = v[d] + extra_var;
                    let diff = x[d] - m[d];
                    acc += (2.0 * PI * var).ln() + diff * diff / var;
                }
            }
            out[k] = self.weights[k].ln() - 0.5 * acc;
        }
    }

    pub fn log_likelihood(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.k()];
        self.log_joint(x, 0.0, None, &mut buf);
        softmax_in_place(&mut buf)
    }

    pub fn mean_log_likelihood(&self, samples: &SampleSet) -> f64 {
        let total: f64 = samples.rows().map(|x| self.log_likelihood(x)).sum();
        total / samples.len() as f64
    }

    /// Posterior component probabilities `P(k | x)`.
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = vec![0.0; self.k()];
        self.log_joint(x, 0.0, None, &mut buf);
        softmax_in_place(&mut buf);
        buf
    }

    /// Mixture mean `sum_k pi_k mu_k`.
    pub fn prior_mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (w, m) in self.weights.iter().zip(&self.means) {
            for (o, &v) in out.iter_mut().zip(m) {
                *o += w * v;
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDoc {
            format: MODEL_FORMAT.into(),
            k: self.k(),
            dim: self.dim(),
            weights: self.weights.clone(),
            means: self.means.clone(),
            diag_covariances: self.variances.clone(),
            training_meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    /// Parses and validates a model document. Dimensions other than 10
    /// are rejected unless `any_dim` is set.
    pub fn from_json(text: &str, any_dim: bool) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Format(format!("unsupported model format {:?}", doc.format)));
        }
        let model = Self {
            weights: doc.weights,
            means: doc.means,
            variances: doc.diag_covariances,
            meta: doc.training_meta,
        };
        if model.k() != doc.k || model.dim() != doc.dim {
            return Err(Error::Format("declared K or dim does not match the arrays".into()));
        }
        model.validate(any_dim)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path, any_dim: bool) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, any_dim)
    }
}

/// Most probable component for `x` and its posterior probability.
pub fn posterior_component(model: &PhaseGmm, x: &[f64]) -> (usize, f64) {
    let post = model.posterior(x);
    let mut best = 0;
    for (k, &p) in post.iter().enumerate() {
        if p > post[best] {
            best = k;
        }
    }
    (best, post[best])
}

/// Scale-normalized mean phases `[2 mu(10), mu(1), mean(mu(6..9)) / 2]`
/// of a 10-dimensional mean, coarsest first.
pub fn scale_phases(mean: &[f64]) -> [f64; 3] {
    let children = mean[5..9].iter().sum::<f64>() / 4.0;
    [2.0 * mean[9], mean[0], 0.5 * children]
}

/// Average congruency of component `k`: the absolute mean cosine of the
/// scale-normalized phases about their mean.
pub fn average_congruency(model: &PhaseGmm, k: usize) -> Result<f64> {
    if k >= model.k() {
        return invalid(format!("component {k} out of range (K = {})", model.k()));
    }
    if model.dim() != SUBTREE_DIM {
        return invalid("average congruency needs 10-dimensional sub-tree means");
    }
    Ok(congruency_of(scale_phases(&model.means[k])))
}

pub fn congruency_of(eta: [f64; 3]) -> f64 {
    let mean = eta.iter().sum::<f64>() / 3.0;
    (eta.iter().map(|e| (e - mean).cos()).sum::<f64>() / 3.0).abs()
}
