//! Dual-tree complex wavelet transform (2-D).
//!
//! Each detail level holds six complex sub-bands. Orientation index `o` in
//! `0..6` corresponds to orientations 1..6 = +15, +45, +75, -75, -45, -15
//! degrees. Level 1 is the finest. A `levels`-level decomposition of an
//! `N x N` image has level-`i` bands of size `N / 2^i` and a real lowpass of
//! size `N / 2^(levels-1)` that interleaves both trees.

mod filters;
pub mod lowlevel;
mod probe;
mod serialize;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use filters::{Biort, QShift, FILTER_SET_ID};
pub use probe::{shift_invariance_probe, shift_image};
pub use serialize::{decode_pyramid, encode_pyramid, PYRAMID_MAGIC, PYRAMID_VERSION};

use crate::error::{invalid, mismatch, Result};
use crate::numerics::{ComplexImage, RealImage};
use lowlevel::{coldfilt, colfilter, colifilt, sym_index};

pub const ORIENTATIONS: usize = 6;

/// Nominal centre orientation of each band, degrees.
pub const ORIENTATION_DEGREES: [f64; ORIENTATIONS] = [15.0, 45.0, 75.0, -75.0, -45.0, -15.0];

#[derive(Debug, Clone, PartialEq)]
pub struct DetailLevel {
    /// Scale index, 1 = finest.
    pub level: usize,
    pub bands: Vec<ComplexImage>,
}

impl DetailLevel {
    pub fn band_dims(&self) -> (usize, usize) {
        self.bands[0].dims()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PyramidMeta {
    pub height: usize,
    pub width: usize,
    pub padded_height: usize,
    pub padded_width: usize,
    pub filter_set: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPyramid {
    /// `levels[0]` is level 1 (finest).
    pub levels: Vec<DetailLevel>,
    pub lowpass: RealImage,
    pub meta: PyramidMeta,
}

impl ComplexPyramid {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Band at 1-based `level` and 0-based `orientation`.
    pub fn band(&self, level: usize, orientation: usize) -> &ComplexImage {
        &self.levels[level - 1].bands[orientation]
    }

    pub fn band_mut(&mut self, level: usize, orientation: usize) -> &mut ComplexImage {
        &mut self.levels[level - 1].bands[orientation]
    }

    pub fn detail_count(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.bands.iter().map(ComplexImage::len).sum::<usize>())
            .sum()
    }

    /// Total stored coefficient count, counting each complex value once.
    pub fn coefficient_count(&self) -> usize {
        self.detail_count() + self.lowpass.len()
    }

    /// Copy with every detail coefficient replaced by `f(level, orientation, value)`.
    pub fn map_details(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for lvl in &mut out.levels {
            let level = lvl.level;
            for (o, band) in lvl.bands.iter_mut().enumerate() {
                band.data_mut().iter_mut().for_each(|z| *z = f(level, o, *z));
            }
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut out = self.map_details(|_, _, _| Complex64::new(0.0, 0.0));
        out.lowpass = RealImage::zeros(self.lowpass.height(), self.lowpass.width());
        out
    }

    /// Structural compatibility (same level count and band sizes).
    pub fn same_layout(&self, other: &ComplexPyramid) -> bool {
        self.levels.len() == other.levels.len()
            && self.lowpass.dims() == other.lowpass.dims()
            && self
                .levels
                .iter()
                .zip(&other.levels)
                .all(|(a, b)| a.bands.len() == b.bands.len() && a.band_dims() == b.band_dims())
    }

    /// Detail-band energy per level (sum over the six bands).
    pub fn level_energies(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|l| l.bands.iter().map(ComplexImage::energy).sum())
            .collect()
    }
}

/// Dual-tree transform with a given filter pair.
#[derive(Debug, Clone)]
pub struct Dtcwt {
    biort: Biort,
    qshift: QShift,
}

impl Default for Dtcwt {
    fn default() -> Self {
        Self {
            biort: Biort::near_sym_b(),
            qshift: QShift::qshift_b(),
        }
    }
}

/// Quads of real samples to pairs of complex sub-bands.
fn q2c(y: &RealImage) -> (ComplexImage, ComplexImage) {
    let (h, w) = (y.height() / 2, y.width() / 2);
    let mut a = ComplexImage::zeros(h, w);
    let mut b = ComplexImage::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let p = Complex64::new(y.get(2 * r, 2 * c), y.get(2 * r, 2 * c + 1)) * FRAC_1_SQRT_2;
            let q = Complex64::new(y.get(2 * r + 1, 2 * c + 1), -y.get(2 * r + 1, 2 * c))
                * FRAC_1_SQRT_2;
            a.set(r, c, p - q);
            b.set(r, c, p + q);
        }
    }
    (a, b)
}

/// Inverse of `q2c`.
fn c2q(w0: &ComplexImage, w1: &ComplexImage) -> RealImage {
    let (h, w) = w0.dims();
    let mut x = RealImage::zeros(2 * h, 2 * w);
    for r in 0..h {
        for c in 0..w {
            let p = (w0.get(r, c) + w1.get(r, c)) * FRAC_1_SQRT_2;
            let q = (w0.get(r, c) - w1.get(r, c)) * FRAC_1_SQRT_2;
            x.set(2 * r, 2 * c, p.re);
            x.set(2 * r, 2 * c + 1, p.im);
            x.set(2 * r + 1, 2 * c, q.im);
            x.set(2 * r + 1, 2 * c + 1, -q.re);
        }
    }
    x
}

fn assemble(pairs: [(ComplexImage, ComplexImage); 3]) -> Vec<ComplexImage> {
    // pairs: (horizontal -> bands 0,5), (vertical -> 2,3), (diagonal -> 1,4)
    let [(h0, h5), (v2, v3), (d1, d4)] = pairs;
    vec![h0, d1, v2, v3, d4, h5]
}

fn add(a: &RealImage, b: &RealImage) -> RealImage {
    RealImage::from_fn(a.height(), a.width(), |r, c| a.get(r, c) + b.get(r, c))
}

/// Symmetrically extends `image` on the bottom/right to `h` x `w`.
fn sym_pad(image: &RealImage, h: usize, w: usize) -> RealImage {
    let (ih, iw) = image.dims();
    RealImage::from_fn(h, w, |r, c| {
        image.get(sym_index(r as isize, ih), sym_index(c as isize, iw))
    })
}

impl Dtcwt {
    pub fn new(biort: Biort, qshift: QShift) -> Self {
        Self { biort, qshift }
    }

    /// Forward transform. Images whose sides are not multiples of
    /// `2^levels` are symmetrically padded; the padding is recorded in the
    /// pyramid and removed by [`Dtcwt::inverse`].
    pub fn forward(&self, image: &RealImage, levels: usize) -> Result<ComplexPyramid> {
        if levels == 0 {
            return invalid("levels must be >= 1");
        }
        let (h, w) = image.dims();
        if levels >= usize::BITS as usize || h.min(w) < (1usize << levels) {
            return invalid(format!(
                "{levels} levels need image sides >= {}, got {h}x{w}",
                1u128 << levels.min(127)
            ));
        }
        let step = 1usize << levels;
        let (ph, pw) = (h.div_ceil(step) * step, w.div_ceil(step) * step);
        let x = if (ph, pw) == (h, w) {
            image.clone()
        } else {
            sym_pad(image, ph, pw)
        };

        let b = &self.biort;
        let q = &self.qshift;
        let mut out_levels = Vec::with_capacity(levels);

        let lo = colfilter(&x, &b.h0o).transpose();
        let hi = colfilter(&x, &b.h1o).transpose();
        let mut lolo = colfilter(&lo, &b.h0o).transpose();
        out_levels.push(DetailLevel {
            level: 1,
            bands: assemble([
                q2c(&colfilter(&hi, &b.h0o).transpose()),
                q2c(&colfilter(&lo, &b.h1o).transpose()),
                q2c(&colfilter(&hi, &b.h1o).transpose()),
            ]),
        });

        for level in 2..=levels {
            let lo = coldfilt(&lolo, &q.h0b, &q.h0a).transpose();
            let hi = coldfilt(&lolo, &q.h1b, &q.h1a).transpose();
            lolo = coldfilt(&lo, &q.h0b, &q.h0a).transpose();
            out_levels.push(DetailLevel {
                level,
                bands: assemble([
                    q2c(&coldfilt(&hi, &q.h0b, &q.h0a).transpose()),
                    q2c(&coldfilt(&lo, &q.h1b, &q.h1a).transpose()),
                    q2c(&coldfilt(&hi, &q.h1b, &q.h1a).transpose()),
                ]),
            });
        }

        Ok(ComplexPyramid {
            levels: out_levels,
            lowpass: lolo,
            meta: PyramidMeta {
                height: h,
                width: w,
                padded_height: ph,
                padded_width: pw,
                filter_set: FILTER_SET_ID.to_string(),
            },
        })
    }

    fn validate(&self, p: &ComplexPyramid) -> Result<()> {
        let levels = p.levels.len();
        if levels == 0 {
            return invalid("pyramid has no detail levels");
        }
        let (ph, pw) = (p.meta.padded_height, p.meta.padded_width);
        let low_expect = (ph >> (levels - 1), pw >> (levels - 1));
        if p.lowpass.dims() != low_expect {
            return mismatch(format!("lowpass {low_expect:?}"), format!("{:?}", p.lowpass.dims()));
        }
        for (i, lvl) in p.levels.iter().enumerate() {
            let expect = (ph >> (i + 1), pw >> (i + 1));
            if lvl.bands.len() != ORIENTATIONS {
                return mismatch(
                    format!("{ORIENTATIONS} bands at level {}", i + 1),
                    lvl.bands.len(),
                );
            }
            for band in &lvl.bands {
                if band.dims() != expect {
                    return mismatch(
                        format!("level {} band {expect:?}", i + 1),
                        format!("{:?}", band.dims()),
                    );
                }
            }
        }
        Ok(())
    }

    /// Inverse transform; crops any padding added by the forward transform.
    pub fn inverse(&self, p: &ComplexPyramid) -> Result<RealImage> {
        self.validate(p)?;
        let b = &self.biort;
        let q = &self.qshift;
        let mut z = p.lowpass.clone();
        for level in (2..=p.levels.len()).rev() {
            let bands = &p.levels[level - 1].bands;
            let lh = c2q(&bands[0], &bands[5]);
            let hl = c2q(&bands[2], &bands[3]);
            let hh = c2q(&bands[1], &bands[4]);
            let y1 = add(&colifilt(&z, &q.g0b, &q.g0a), &colifilt(&lh, &q.g1b, &q.g1a));
            let y2 = add(&colifilt(&hl, &q.g0b, &q.g0a), &colifilt(&hh, &q.g1b, &q.g1a));
            z = add(
                &colifilt(&y1.transpose(), &q.g0b, &q.g0a),
                &colifilt(&y2.transpose(), &q.g1b, &q.g1a),
            )
            .transpose();
        }
        let bands = &p.levels[0].bands;
        let lh = c2q(&bands[0], &bands[5]);
        let hl = c2q(&bands[2], &bands[3]);
        let hh = c2q(&bands[1], &bands[4]);
        let y1 = add(&colfilter(&z, &b.g0o), &colfilter(&lh, &b.g1o));
        let y2 = add(&colfilter(&hl, &b.g0o), &colfilter(&hh, &b.g1o));
        let full = add(
            &colfilter(&y1.transpose(), &b.g0o),
            &colfilter(&y2.transpose(), &b.g1o),
        )
        .transpose();
        if full.dims() == (p.meta.height, p.meta.width) {
            Ok(full)
        } else {
            full.crop(0, 0, p.meta.height, p.meta.width)
        }
    }
}

/// Forward transform with the default filter pair.
pub fn dtcwt_forward(image: &RealImage, levels: usize) -> Result<ComplexPyramid> {
    Dtcwt::default().forward(image, levels)
}

/// Inverse transform with the default filter pair.
pub fn dtcwt_inverse(pyramid: &ComplexPyramid) -> Result<RealImage> {
    Dtcwt::default().inverse(pyramid)
}
