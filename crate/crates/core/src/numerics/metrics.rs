//! PSNR and SSIM for images normalized to [0, 1].
//!
//! SSIM uses an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03 and
//! dynamic range 1.0, averaged over the positions where the window fits
//! entirely inside the image. Images smaller than 11 pixels on a side use the
//! largest odd window that fits.

use serde::{Deserialize, Serialize};

use super::image::RealImage;
use crate::error::Result;

pub const PSNR_PEAK: f64 = 1.0;
const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_RANGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    /// Decibels; `f64::INFINITY` for identical images.
    pub psnr: f64,
    pub ssim: f64,
}

impl QualityScore {
    pub fn of(reference: &RealImage, test: &RealImage) -> Result<Self> {
        Ok(Self {
            psnr: psnr(reference, test)?,
            ssim: ssim(reference, test)?,
        })
    }
}

pub fn mse(a: &RealImage, b: &RealImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

pub fn psnr(a: &RealImage, b: &RealImage) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PSNR_PEAK * PSNR_PEAK / m).log10())
}

fn gaussian_taps(size: usize) -> Vec<f64> {
    let half = (size / 2) as f64;
    let mut taps: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - half;
            (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable 'valid' filtering of `data` with `taps` along both axes.
fn filter_valid(data: &[f64], h: usize, w: usize, taps: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = taps.len();
    let ow = w - n + 1;
    let oh = h - n + 1;
    let mut tmp = vec![0.0; h * ow];
    for r in 0..h {
        let row = &data[r * w..(r + 1) * w];
        for c in 0..ow {
            tmp[r * ow + c] = taps.iter().zip(&row[c..c + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * tmp[(r + k) * ow + c];
            }
            out[r * ow + c] = acc;
        }
    }
    (out, oh, ow)
}

pub fn ssim(a: &RealImage, b: &RealImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (h, w) = a.dims();
    let mut size = SSIM_WINDOW.min(h).min(w);
    if size % 2 == 0 {
        size -= 1;
    }
    let taps = gaussian_taps(size);
    let x = a.data();
    let y = b.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let (mx, _, _) = filter_valid(x, h, w, &taps);
    let (my, _, _) = filter_valid(y, h, w, &taps);
    let (exx, _, _) = filter_valid(&xx, h, w, &taps);
    let (eyy, _, _) = filter_valid(&yy, h, w, &taps);
    let (exy, _, _) = filter_valid(&xy, h, w, &taps);
    let c1 = (SSIM_K1 * SSIM_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);
    let mut total = 0.0;
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let sx = exx[i] - ux * ux;
        let sy = eyy[i] - uy * uy;
        let sxy = exy[i] - ux * uy;
        let num = (2.0 * ux * uy + c1) * (2.0 * sxy + c2);
        let den = (ux * ux + uy * uy + c1) * (sx + sy + c2);
        total += num / den;
    }
    Ok(total / mx.len() as f64)
}
