use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{em_fit, EmConfig, SampleSet};
use crate::error::{invalid, Result};
use crate::par;
use crate::rng;

/// Held-out score of one component count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub k: usize,
    /// Mean over folds of the mean held-out log-likelihood.
    pub mean: f64,
    pub per_fold: Vec<f64>,
}

/// Random partition of `0..n` into `folds` disjoint subsets whose sizes
/// differ by at most one.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, "cv-folds"));
    let mut out = vec![Vec::with_capacity(n / folds.max(1) + 1); folds];
    for (j, i) in idx.into_iter().enumerate() {
        out[j % folds].push(i);
    }
    out
}

/// K-fold cross-validated mean log-likelihood for every candidate K.
pub fn cross_validate(
    samples: &SampleSet,
    ks: &[usize],
    folds: usize,
    config: &EmConfig,
) -> Result<Vec<CvScore>> {
    if folds < 2 {
        return invalid("cross-validation needs at least 2 folds");
    }
    let kmax = ks.iter().copied().max().unwrap_or(0);
    if kmax == 0 {
        return invalid("no component counts to evaluate");
    }
    let need = folds * kmax * samples.dim();
    if samples.len() < need {
        return invalid(format!(
            "{} samples are too few for {folds} folds at K = {kmax} (need {need})",
            samples.len()
        ));
    }
    let parts = fold_partition(samples.len(), folds, config.seed);
    let jobs: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..folds).map(move |f| (k, f)))
        .collect();
    let scores = par::map(&jobs, |&(k, f)| -> Result<f64> {
        let train: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != f)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        let cfg = EmConfig {
            seed: config.seed ^ ((k as u64) << 32 | f as u64),
            ..config.clone()
        };
        let fit = em_fit(&samples.subset(&train), k, &cfg)?;
        Ok(fit.model.mean_log_likelihood(&samples.subset(&parts[f])))
    });
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let per_fold = scores[i * folds..(i + 1) * folds].to_vec();
            CvScore {
                k,
                mean: per_fold.iter().sum::<f64>() / folds as f64,
                per_fold,
            }
        })
        .collect())
}

fn line_residual(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    x.iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum()
}

/// Elbow of a score curve: the interior point at which two least-squares
/// lines, one through the points up to it and one through the points from
/// it on, leave the smallest total squared residual. Ties go to the
/// smaller K.
pub fn find_elbow(ks: &[usize], scores: &[f64]) -> Result<usize> {
    if ks.len() != scores.len() {
        return crate::error::mismatch(ks.len(), scores.len());
    }
    if ks.len() < 4 {
        return invalid(format!("elbow search needs at least 4 points, got {}", ks.len()));
    }
    let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let residuals: Vec<f64> = (1..ks.len() - 1)
        .map(|b| line_residual(&x[..=b], &scores[..=b]) + line_residual(&x[b..], &scores[b..]))
        .collect();
    let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    // rounding slack so exactly-linear data keeps the first candidate
    let slack = 1e-12 * (1.0 + scores.iter().map(|v| v * v).sum::<f64>());
    let b = residuals.iter().position(|&r| r <= min + slack).unwrap_or(0);
    Ok(ks[b + 1])
}
