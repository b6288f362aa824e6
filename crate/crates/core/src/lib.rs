//! Local-phase modelling of dual-tree complex wavelet coefficients.
//!
//! A Gaussian mixture over 10-dimensional sub-tree phase vectors is learned
//! from images and used as a prior for phase denoising, for phase retrieval
//! from Fourier magnitude (HIO with periodic local-phase estimation), and for
//! half-quadratic-splitting restoration.

pub mod appendixcheck;
pub mod denoise;
pub mod dtcwt;
pub mod error;
pub mod graph;
pub mod hqs;
pub mod model;
pub mod retrieval;
pub mod numerics;
pub mod par;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
