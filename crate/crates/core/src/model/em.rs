use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{softmax_in_place, PhaseGmm, SampleSet, TrainingMeta};
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::rng;

/// Smallest admissible diagonal variance, rad^2.
pub const VARIANCE_FLOOR: f64 = 1e-4;

/// Required samples per trainable parameter.
pub const MIN_R_PARAMS: f64 = 50.0;

const CHUNK: usize = 2048;

/// Parameter count of a mixture and the samples available per parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingBudget {
    pub n_samples: usize,
    pub n_params: usize,
    pub r_params: f64,
}

impl TrainingBudget {
    /// `n_params = (m^r + m) k + k` for dimension `m`, `k` components and
    /// covariance exponent `r` (1 diagonal, 2 full).
    pub fn new(n_samples: usize, m: usize, k: usize, r: u32) -> Self {
        let n_params = (m.pow(r) + m) * k + k;
        Self {
            n_samples,
            n_params,
            r_params: n_samples as f64 / n_params as f64,
        }
    }

    pub fn is_sufficient(&self) -> bool {
        self.r_params > MIN_R_PARAMS
    }

    pub fn check(&self) -> Result<()> {
        if self.is_sufficient() {
            Ok(())
        } else {
            Err(Error::Budget {
                n_samples: self.n_samples,
                n_params: self.n_params,
                r_params: self.r_params,
                required: MIN_R_PARAMS,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop when the relative mean log-likelihood gain falls below this.
    pub tol: f64,
    pub seed: u64,
    pub variance_floor: f64,
    /// Size of the random subset used for k-means++ seeding.
    pub init_subset: usize,
    /// Fit even when the sample budget is insufficient.
    pub force: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-6,
            seed: 0,
            variance_floor: VARIANCE_FLOOR,
            init_subset: 10_000,
            force: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: PhaseGmm,
    /// Mean log-likelihood of the parameters entering each iteration; the
    /// last entry belongs to the returned model.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of (component, coordinate) variances clamped to the floor,
    /// summed over iterations.
    pub floor_events: usize,
    pub budget: TrainingBudget,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}

fn kmeans_pp<R: Rng>(samples: &SampleSet, subset: &[usize], k: usize, g: &mut R) -> Vec<Vec<f64>> {
    let mut centers = vec![samples.row(subset[g.random_range(0..subset.len())]).to_vec()];
    let mut d2: Vec<f64> = subset.iter().map(|&i| sq_dist(samples.row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = g.random::<f64>() * total;
            let mut j = d2.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    j = i;
                    break;
                }
                u -= d;
            }
            j
        } else {
            g.random_range(0..subset.len())
        };
        let c = samples.row(subset[pick]).to_vec();
        for (d, &i) in d2.iter_mut().zip(subset) {
            *d = d.min(sq_dist(samples.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

/// Per-chunk sufficient statistics.
struct Stats {
    ll: f64,
    nk: Vec<f64>,
    sx: Vec<f64>,
    sxx: Vec<f64>,
}

impl Stats {
    fn zeros(k: usize, dim: usize) -> Self {
        Self {
            ll: 0.0,
            nk: vec![0.0; k],
            sx: vec![0.0; k * dim],
            sxx: vec![0.0; k * dim],
        }
    }

    fn add(&mut self, o: &Stats) {
        self.ll += o.ll;
        for (a, b) in self.nk.iter_mut().zip(&o.nk) {
            *a += b;
        }
        for (a, b) in self.sx.iter_mut().zip(&o.sx) {
            *a += b;
        }
        for (a, b) in self.sxx.iter_mut().zip(&o.sxx) {
            *a += b;
        }
    }
}

/// E-step over all samples, accumulated chunk by chunk in a fixed order so
/// the result does not depend on the thread count.
fn e_step(model: &PhaseGmm, samples: &SampleSet) -> Stats {
    let (k, dim) = (model.k(), samples.dim());
    let consts: Vec<f64> = (0..k)
        .map(|j| {
            model.weights[j].ln()
                - 0.5 * model.variances[j].iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>()
        })
        .collect();
    let inv: Vec<Vec<f64>> = model
        .variances
        .iter()
        .map(|v| v.iter().map(|x| 1.0 / x).collect())
        .collect();
    let n = samples.len();
    let chunks = n.div_ceil(CHUNK);
    let parts = par::map_range(chunks, |ci| {
        let mut st = Stats::zeros(k, dim);
        let mut resp = vec![0.0; k];
        for i in ci * CHUNK..((ci + 1) * CHUNK).min(n) {
            let x = samples.row(i);
            for j in 0..k {
                let m = &model.means[j];
                let mut q = 0.0;
                for d in 0..dim {
                    let diff = x[d] - m[d];
                    q += diff * diff * inv[j][d];
                }
                resp[j] = consts[j] - 0.5 * q;
            }
            st.ll += softmax_in_place(&mut resp);
            for j in 0..k {
                let r = resp[j];
                if r == 0.0 {
                    continue;
                }
                st.nk[j] += r;
                for d in 0..dim {
                    st.sx[j * dim + d] += r * x[d];
                    st.sxx[j * dim + d] += r * x[d] * x[d];
                }
            }
        }
        st
    });
    let mut total = Stats::zeros(k, dim);
    for p in &parts {
        total.add(p);
    }
    total
}

/// M-step; returns the number of variances clamped to the floor.
fn m_step(model: &mut PhaseGmm, st: &Stats, n: usize, floor: f64) -> usize {
    let dim = model.dim();
    let mut floored = 0;
    for j in 0..model.k() {
        let nk = st.nk[j];
        model.weights[j] = nk / n as f64;
        if nk <= 0.0 {
            continue;
        }
        for d in 0..dim {
            let mean = st.sx[j * dim + d] / nk;
            let var = st.sxx[j * dim + d] / nk - mean * mean;
            model.means[j][d] = mean;
            if var < floor {
                floored += 1;
            }
            model.variances[j][d] = var.max(floor);
        }
    }
    let total: f64 = model.weights.iter().sum();
    model.weights.iter_mut().for_each(|w| *w /= total);
    floored
}

fn initial_model(samples: &SampleSet, k: usize, config: &EmConfig) -> PhaseGmm {
    let (n, dim) = (samples.len(), samples.dim());
    let mut g = rng::stream(config.seed, "em-init");
    let subset = index::sample(&mut g, n, config.init_subset.min(n).max(1)).into_vec();
    let mut centers = kmeans_pp(samples, &subset, k, &mut g);

    // one k-means refinement pass over all samples
    let labels: Vec<usize> = par::map_range(n, |i| nearest(samples.row(i), &centers));
    let mut counts = vec![0usize; k];
    let mut sums = vec![vec![0.0; dim]; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(samples.row(i)) {
            *s += x;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
        }
    }
    let mut global_var = vec![0.0; dim];
    let global_mean: Vec<f64> = (0..dim)
        .map(|d| samples.rows().map(|x| x[d]).sum::<f64>() / n as f64)
        .collect();
    for x in samples.rows() {
        for d in 0..dim {
            global_var[d] += (x[d] - global_mean[d]).powi(2) / n as f64;
        }
    }
    let mut vars = vec![vec![0.0; dim]; k];
    for (i, &l) in labels.iter().enumerate() {
        for (d, x) in samples.row(i).iter().enumerate() {
            vars[l][d] += (x - centers[l][d]).powi(2);
        }
    }
    for j in 0..k {
        for d in 0..dim {
            vars[j][d] = if counts[j] > 1 {
                vars[j][d] / counts[j] as f64
            } else {
                global_var[d]
            }
            .max(config.variance_floor);
        }
    }
    let total: usize = counts.iter().map(|&c| c.max(1)).sum();
    PhaseGmm {
        weights: counts.iter().map(|&c| c.max(1) as f64 / total as f64).collect(),
        means: centers,
        variances: vars,
        meta: TrainingMeta::default(),
    }
}

/// Fits a `k`-component diagonal mixture by EM after k-means++ seeding and
/// one k-means pass. Refuses undersized sample sets unless `config.force`.
pub fn em_fit(samples: &SampleSet, k: usize, config: &EmConfig) -> Result<FitReport> {
    if k == 0 {
        return invalid("K must be at least 1");
    }
    let n = samples.len();
    if n < k {
        return invalid(format!("{n} samples cannot seed {k} components"));
    }
    let budget = TrainingBudget::new(n, samples.dim(), k, 1);
    if !budget.is_sufficient() {
        if config.force {
            log::warn!(
                "fitting with r_params = {:.2} (n_params = {}, samples = {n})",
                budget.r_params,
                budget.n_params
            );
        } else {
            budget.check()?;
        }
    }
    let mut model = initial_model(samples, k, config);
    let mut trace = Vec::new();
    let mut floor_events = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let st = e_step(&model, samples);
        let ll = st.ll / n as f64;
        if !ll.is_finite() {
            return Err(Error::Numerical(format!("log-likelihood became {ll}")));
        }
        if let Some(&prev) = trace.last() {
            let gain: f64 = ll - prev;
            if gain.abs() <= config.tol * f64::abs(prev) {
                trace.push(ll);
                converged = true;
                break;
            }
        }
        trace.push(ll);
        floor_events += m_step(&mut model, &st, n, config.variance_floor);
        iterations += 1;
    }
    if !converged {
        trace.push(e_step(&model, samples).ll / n as f64);
    }
    if floor_events > 0 {
        log::debug!("{floor_events} variances clamped to {}", config.variance_floor);
    }
    model.meta.sample_count = n;
    model.meta.seed = config.seed;
    Ok(FitReport {
        model,
        trace,
        iterations,
        converged,
        floor_events,
        budget,
    })
}
