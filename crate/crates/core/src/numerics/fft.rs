//! 2-D discrete Fourier transform and global (Fourier) phase utilities.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{Fft, FftPlanner};

use super::image::{ComplexImage, RealImage};
use super::phase::wrap;
use crate::error::{invalid, Error, Result};

/// Reusable forward/inverse plans for one image size.
#[derive(Clone)]
pub struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.height, self.width)
    }
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let (h, w) = (self.height, self.width);
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        row.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); h];
        let mut scratch = vec![Complex64::new(0.0, 0.0); col.get_inplace_scratch_len()];
        for c in 0..w {
            for r in 0..h {
                column[r] = data[r * w + c];
            }
            col.process_with_scratch(&mut column, &mut scratch);
            for r in 0..h {
                data[r * w + c] = column[r];
            }
        }
        if inverse {
            let scale = 1.0 / (h * w) as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    pub fn forward(&self, image: &ComplexImage) -> ComplexImage {
        debug_assert_eq!(image.dims(), (self.height, self.width));
        let mut out = image.clone();
        self.run(out.data_mut(), false);
        out
    }

    pub fn forward_real(&self, image: &RealImage) -> ComplexImage {
        self.forward(&image.to_complex())
    }

    /// Normalized inverse: `inverse(forward(x)) == x`.
    pub fn inverse(&self, spectrum: &ComplexImage) -> ComplexImage {
        debug_assert_eq!(spectrum.dims(), (self.height, self.width));
        let mut out = spectrum.clone();
        self.run(out.data_mut(), true);
        out
    }
}

fn check_finite_complex(image: &ComplexImage) -> Result<()> {
    match image
        .data()
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Forward 2-D DFT of a real image (unnormalized).
pub fn dft2(image: &RealImage) -> Result<ComplexImage> {
    if let Some(index) = image.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(Fft2::new(image.height(), image.width()).forward_real(image))
}

/// Forward 2-D DFT of a complex image (unnormalized).
pub fn dft2_complex(image: &ComplexImage) -> Result<ComplexImage> {
    check_finite_complex(image)?;
    Ok(Fft2::new(image.height(), image.width()).forward(image))
}

/// Inverse 2-D DFT, normalized by 1/(HW).
pub fn idft2(spectrum: &ComplexImage) -> Result<ComplexImage> {
    check_finite_complex(spectrum)?;
    Ok(Fft2::new(spectrum.height(), spectrum.width()).inverse(spectrum))
}

/// Magnitude and phase of a spectrum; zero-magnitude bins get phase 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSpectrum {
    pub magnitude: RealImage,
    pub phase: RealImage,
}

pub fn decompose(spectrum: &ComplexImage) -> PolarSpectrum {
    let (h, w) = spectrum.dims();
    let mut magnitude = RealImage::zeros(h, w);
    let mut phase = RealImage::zeros(h, w);
    for (i, z) in spectrum.data().iter().enumerate() {
        magnitude.data_mut()[i] = z.norm();
        phase.data_mut()[i] = super::phase::angle(*z);
    }
    PolarSpectrum { magnitude, phase }
}

pub fn recompose(polar: &PolarSpectrum) -> Result<ComplexImage> {
    polar.magnitude.ensure_same_dims(&polar.phase)?;
    let (h, w) = polar.magnitude.dims();
    Ok(ComplexImage::from_fn(h, w, |r, c| {
        Complex64::from_polar(polar.magnitude.get(r, c), polar.phase.get(r, c))
    }))
}

/// Global magnitude/phase of an image's spectrum.
pub fn global_phase(image: &RealImage) -> Result<PolarSpectrum> {
    Ok(decompose(&dft2(image)?))
}

/// Index of the conjugate-mirror bin (-r, -c) modulo the image size.
#[inline]
pub fn mirror_index(r: usize, c: usize, h: usize, w: usize) -> (usize, usize) {
    ((h - r) % h, (w - c) % w)
}

/// Builds an antisymmetric phase field, phi(-k) = -phi(k), by drawing one
/// value per conjugate pair in row-major order. Self-conjugate bins get 0.
pub fn hermitian_phase_field(h: usize, w: usize, mut draw: impl FnMut() -> f64) -> RealImage {
    let mut field = RealImage::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let (mr, mc) = mirror_index(r, c, h, w);
            let idx = r * w + c;
            let midx = mr * w + mc;
            if idx < midx {
                let v = draw();
                field.set(r, c, v);
                field.set(mr, mc, -v);
            }
        }
    }
    field
}

/// Spectrum of `image` with Hermitian-symmetric Gaussian noise of std
/// `sigma` added to its phase. The inverse of the result is real up to
/// rounding.
pub fn perturbed_spectrum<R: Rng + ?Sized>(
    image: &RealImage,
    sigma: f64,
    rng: &mut R,
) -> Result<ComplexImage> {
    if !(sigma >= 0.0) {
        return invalid(format!("sigma must be >= 0, got {sigma}"));
    }
    let spectrum = dft2(image)?;
    let (h, w) = spectrum.dims();
    let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let noise = hermitian_phase_field(h, w, || normal.sample(rng));
    Ok(ComplexImage::from_fn(h, w, |r, c| {
        spectrum.get(r, c) * Complex64::from_polar(1.0, noise.get(r, c))
    }))
}

/// Adds i.i.d. Gaussian noise to the global phase, keeping the output real.
/// `sigma == 0` returns the input unchanged.
pub fn perturb_global_phase<R: Rng + ?Sized>(
    image: &RealImage,
    sigma: f64,
    rng: &mut R,
) -> Result<RealImage> {
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    Ok(idft2(&perturbed_spectrum(image, sigma, rng)?)?.re())
}

/// Randomizes (uniformly on (-pi, pi]) the phases of the lowest-magnitude
/// `fraction` of conjugate bin pairs, keeping the output real.
pub fn randomize_global_phase_fraction<R: Rng + ?Sized>(
    image: &RealImage,
    fraction: f64,
    rng: &mut R,
) -> Result<RealImage> {
    if !(0.0..=1.0).contains(&fraction) {
        return invalid(format!("fraction must be in [0, 1], got {fraction}"));
    }
    let spectrum = dft2(image)?;
    let (h, w) = spectrum.dims();
    // one representative per conjugate pair
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let (mr, mc) = mirror_index(r, c, h, w);
            if r * w + c < mr * w + mc {
                pairs.push((spectrum.get(r, c).norm(), r, c));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let count = (fraction * pairs.len() as f64).round() as usize;
    let mut out = spectrum.clone();
    for &(mag, r, c) in pairs.iter().take(count) {
        let phi = wrap(rng.random_range(-PI..PI));
        let (mr, mc) = mirror_index(r, c, h, w);
        out.set(r, c, Complex64::from_polar(mag, phi));
        out.set(mr, mc, Complex64::from_polar(mag, -phi));
    }
    Ok(idft2(&out)?.re())
}
