//! Image containers, Fourier transforms, quality metrics and phase helpers.

pub mod fft;
pub mod image;
pub mod io;
pub mod metrics;
pub mod phase;
pub mod stats;

pub use fft::{
    decompose, dft2, dft2_complex, global_phase, idft2, perturb_global_phase,
    randomize_global_phase_fraction, recompose, Fft2,
    PolarSpectrum,
};
pub use image::{ComplexImage, RealImage};
pub use metrics::{psnr, ssim, QualityScore};
pub use phase::{angle, wrap, wrapped_diff};
pub use stats::kurtosis;
