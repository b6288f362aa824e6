use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Fourth standardized moment (a Gaussian gives 3).
pub fn kurtosis(samples: &[f64]) -> Result<f64> {
    if samples.len() < 4 {
        return invalid(format!("kurtosis needs >= 4 samples, got {}", samples.len()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - mean;
        let d2 = d * d;
        (a + d2, b + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 <= 0.0 || !m2.is_normal() {
        return invalid("kurtosis undefined for zero variance");
    }
    Ok(m4 / (m2 * m2))
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `phases` and the uniform distribution on [-pi, pi].
pub fn ks_uniform_phase(phases: &[f64]) -> Result<f64> {
    if phases.is_empty() {
        return invalid("KS distance of an empty sample");
    }
    let mut sorted = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = ((x + PI) / (2.0 * PI)).clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
