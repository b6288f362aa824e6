//! Numerical checks of how a global (Fourier) phase perturbation of one
//! frequency shows up in local STFT coefficients of a 1-D signal.
//!
//! Conventions: `x(t) = (1/N) sum_f X(f) e^{j 2 pi f t / N}`; rotating bin
//! `f0` by `eta` radians also rotates the mirror bin by `-eta` so the signal
//! stays real. The first-order prediction of the STFT change is
//! `eta * j * X(f0)/N * z(f; t0, f0)` plus the mirror's term, with
//! `z(f; t0, f0) = sum_t w(t - t0) e^{j 2 pi (f0 - f) t / N}`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Hann window of `len` taps scaled to unit energy.
pub fn hann_window(len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * (k as f64 + 0.5) / len as f64).cos())
        .collect();
    let e = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.into_iter().map(|v| v / e).collect()
}

/// Local coefficients `X(t0, f)` on frames `t0 = 0, hop, 2 hop, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftGrid {
    pub window: Vec<f64>,
    pub hop: usize,
    /// `coefficients[frame][f]`.
    pub coefficients: Vec<Vec<Complex64>>,
}

impl StftGrid {
    pub fn frame_centre(&self, frame: usize) -> usize {
        frame * self.hop
    }
}

/// Signal index of window tap `k` for a window centred at `t0`, circular.
fn tap_index(t0: usize, k: usize, len: usize, n: usize) -> usize {
    (t0 + n + k - len / 2) % n
}

/// STFT with the window centred on each frame position and circular
/// indexing. Phases are referenced to absolute time.
pub fn stft(x: &[f64], window: &[f64], hop: usize) -> Result<StftGrid> {
    let n = x.len();
    if window.is_empty() || window.len() > n {
        return invalid(format!("window of {} taps does not fit a signal of {n}", window.len()));
    }
    if hop == 0 {
        return invalid("hop must be at least 1");
    }
    let coefficients = (0..n.div_ceil(hop))
        .map(|frame| {
            let t0 = frame * hop;
            (0..n)
                .map(|f| {
                    window
                        .iter()
                        .enumerate()
                        .map(|(k, &wk)| {
                            let t = tap_index(t0, k, window.len(), n);
                            let ang = -2.0 * PI * ((f * t) % n) as f64 / n as f64;
                            Complex64::from_polar(wk * x[t], ang)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(StftGrid {
        window: window.to_vec(),
        hop,
        coefficients,
    })
}

/// `z(f; t0, f0)` for every `f` in `0..n`.
pub fn window_response(window: &[f64], n: usize, t0: usize, f0: usize) -> Vec<Complex64> {
    (0..n)
        .map(|f| {
            let df = (f0 + n - f % n) % n;
            window
                .iter()
                .enumerate()
                .map(|(k, &wk)| {
                    let t = tap_index(t0, k, window.len(), n);
                    Complex64::from_polar(wk, 2.0 * PI * ((df * t) % n) as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

fn spectrum(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut buf);
    buf
}

fn check_bin(n: usize, f0: usize) -> Result<()> {
    if n == 0 || f0 >= n {
        return invalid(format!("bin {f0} is outside 0..{n}"));
    }
    Ok(())
}

/// Bins rotated by a perturbation of `f0`, with their rotation sign.
fn rotated_bins(n: usize, f0: usize) -> Vec<(usize, f64)> {
    let mirror = (n - f0) % n;
    if mirror == f0 {
        vec![(f0, 1.0)]
    } else {
        vec![(f0, 1.0), (mirror, -1.0)]
    }
}

/// Signal whose DFT bin `f0` is rotated by `eta` radians and mirror bin by
/// `-eta`. For a self-conjugate bin (0 or N/2) the real part is kept, which
/// scales that component by `cos(eta)`.
pub fn perturb_one_frequency(x: &[f64], f0: usize, eta: f64) -> Result<Vec<f64>> {
    let n = x.len();
    check_bin(n, f0)?;
    if eta == 0.0 {
        return Ok(x.to_vec());
    }
    let mut spec = spectrum(x);
    for (f, sign) in rotated_bins(n, f0) {
        spec[f] *= Complex64::from_polar(1.0, sign * eta);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    Ok(spec.into_iter().map(|z| z.re / n as f64).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `STFT(x') - STFT(x)`, `[frame][f]`.
    pub measured: Vec<Vec<Complex64>>,
    pub predicted: Vec<Vec<Complex64>>,
    pub max_deviation: f64,
}

/// Measured STFT change against its first-order prediction.
pub fn stft_perturbation_residual(
    x: &[f64],
    f0: usize,
    eta: f64,
    window: &[f64],
    hop: usize,
) -> Result<ResidualReport> {
    let n = x.len();
    check_bin(n, f0)?;
    if !(eta.abs() <= 0.5) {
        return invalid(format!("|eta| must be <= 0.5, got {eta}"));
    }
    let before = stft(x, window, hop)?;
    let after = stft(&perturb_one_frequency(x, f0, eta)?, window, hop)?;
    let spec = spectrum(x);
    let bins = rotated_bins(n, f0);
    let mut max_deviation: f64 = 0.0;
    let mut measured = Vec::with_capacity(before.coefficients.len());
    let mut predicted = Vec::with_capacity(before.coefficients.len());
    for (frame, (b, a)) in before.coefficients.iter().zip(&after.coefficients).enumerate() {
        let t0 = before.frame_centre(frame);
        let mut pred = vec![Complex64::new(0.0, 0.0); n];
        for &(f, sign) in &bins {
            let coeff = if bins.len() == 1 && sign > 0.0 && (f == 0 || 2 * f == n) {
                // self-conjugate bin: only the real part of j*eta survives
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, sign * eta) * spec[f] / n as f64
            };
            for (p, zf) in pred.iter_mut().zip(window_response(window, n, t0, f)) {
                *p += coeff * zf;
            }
        }
        let meas: Vec<Complex64> = a.iter().zip(b).map(|(x1, x0)| x1 - x0).collect();
        for (m, p) in meas.iter().zip(&pred) {
            max_deviation = max_deviation.max((m - p).norm());
        }
        measured.push(meas);
        predicted.push(pred);
    }
    Ok(ResidualReport {
        measured,
        predicted,
        max_deviation,
    })
}

/// `(eta, max deviation)` for each eta.
pub fn deviation_sweep(x: &[f64], f0: usize, etas: &[f64], window: &[f64], hop: usize) -> Result<Vec<(f64, f64)>> {
    etas.iter()
        .map(|&e| Ok((e, stft_perturbation_residual(x, f0, e, window, hop)?.max_deviation)))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return invalid("slope fit needs at least two strictly positive points");
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

pub fn sweep_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("eta,deviation\n");
    for (e, d) in points {
        let _ = writeln!(s, "{e},{d:e}");
    }
    s
}

/// `+1` for `t < n/2` and `-1` otherwise: a step up at `t = 0` on the circle.
/// Two tones (bins 10 and 23) over a box spanning 35% to 59% of the
/// length.
pub fn mixed_signal(n: usize) -> Vec<f64> {
    let (a, b) = (n * 90 / 256, n * 150 / 256);
    (0..n)
        .map(|t| {
            let u = t as f64 / n as f64;
            (2.0 * PI * 10.0 * u + 0.3).cos() + 0.6 * (2.0 * PI * 23.0 * u).sin() + if t > a && t < b { 0.8 } else { 0.0 }
        })
        .collect()
}

pub fn step_signal(n: usize) -> Vec<f64> {
    (0..n).map(|t| if t < n / 2 { 1.0 } else { -1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub eta: f64,
    /// Local phase error at `(t0 = 0, f0)` before enforcement, radians.
    pub local_phase_error: f64,
    /// Global rotation that restores the local phase at `(0, f0)`.
    pub recovered_eta: f64,
    /// `eta - recovered_eta`.
    pub residual: f64,
}

fn local_coefficient(x: &[f64], f0: usize, window: &[f64]) -> Complex64 {
    let n = x.len();
    window
        .iter()
        .enumerate()
        .map(|(k, &wk)| {
            let t = tap_index(0, k, window.len(), n);
            Complex64::from_polar(wk * x[t], -2.0 * PI * ((f0 * t) % n) as f64 / n as f64)
        })
        .sum()
}

/// Perturbs bin `f0` of an `n`-sample step by `eta`, then searches for the
/// global rotation of `f0` that restores the step's local phase at the edge.
pub fn step_edge_demo(n: usize, f0: usize, eta: f64) -> Result<StepReport> {
    check_bin(n, f0)?;
    if !(eta.abs() <= 0.5) {
        return invalid(format!("|eta| must be <= 0.5, got {eta}"));
    }
    let window = hann_window(n / 8);
    let x = step_signal(n);
    let target = local_coefficient(&x, f0, &window).arg();
    let perturbed = perturb_one_frequency(&x, f0, eta)?;
    let phase_error = |theta: f64| -> Result<f64> {
        let y = perturb_one_frequency(&perturbed, f0, -theta)?;
        Ok(crate::numerics::wrapped_diff(local_coefficient(&y, f0, &window).arg(), target))
    };
    let local_phase_error = phase_error(0.0)?.abs();
    // bisection on the bracket [-1, 1], where the error changes sign
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (mut flo, fhi) = (phase_error(lo)?, phase_error(hi)?);
    if flo == 0.0 || flo.signum() == fhi.signum() {
        return Ok(StepReport { eta, local_phase_error, recovered_eta: if flo == 0.0 { lo } else { 0.0 }, residual: eta });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = phase_error(mid)?;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let recovered = 0.5 * (lo + hi);
    Ok(StepReport {
        eta,
        local_phase_error,
        recovered_eta: recovered,
        residual: eta - recovered,
    })
}
