use super::Dtcwt;
use crate::error::Result;
use crate::numerics::RealImage;

/// Circular shift by (`dy`, `dx`) pixels.
pub fn shift_image(image: &RealImage, dy: isize, dx: isize) -> RealImage {
    let (h, w) = image.dims();
    RealImage::from_fn(h, w, |r, c| {
        let sr = (r as isize - dy).rem_euclid(h as isize) as usize;
        let sc = (c as isize - dx).rem_euclid(w as isize) as usize;
        image.get(sr, sc)
    })
}

/// Ratio of per-level detail energy between the shifted and the unshifted
/// decomposition. Values near 1 indicate approximate shift invariance.
pub fn shift_invariance_probe(
    image: &RealImage,
    translation: (isize, isize),
    levels: usize,
) -> Result<Vec<f64>> {
    let t = Dtcwt::default();
    let base = t.forward(image, levels)?.level_energies();
    if translation == (0, 0) {
        return Ok(vec![1.0; base.len()]);
    }
    let shifted = t
        .forward(&shift_image(image, translation.0, translation.1), levels)?
        .level_energies();
    Ok(shifted
        .iter()
        .zip(&base)
        .map(|(s, b)| if *b == 0.0 { 1.0 } else { s / b })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(n: usize) -> RealImage {
        let c = n as f64 / 2.0 - 0.3;
        let rad = n as f64 / 4.0;
        RealImage::from_fn(n, n, |r, col| {
            let d = ((r as f64 - c).powi(2) + (col as f64 - c).powi(2)).sqrt();
            if d < rad {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Per-level detail energy of a decimated separable Haar transform.
    fn haar_level_energies(image: &RealImage, levels: usize) -> Vec<f64> {
        let mut cur = image.clone();
        let mut out = Vec::new();
        for _ in 0..levels {
            let (h, w) = (cur.height() / 2, cur.width() / 2);
            let mut next = RealImage::zeros(h, w);
            let mut e = 0.0;
            for r in 0..h {
                for c in 0..w {
                    let a = cur.get(2 * r, 2 * c);
                    let b = cur.get(2 * r, 2 * c + 1);
                    let d = cur.get(2 * r + 1, 2 * c);
                    let f = cur.get(2 * r + 1, 2 * c + 1);
                    next.set(r, c, (a + b + d + f) / 2.0);
                    let lh = (a - b + d - f) / 2.0;
                    let hl = (a + b - d - f) / 2.0;
                    let hh = (a - b - d + f) / 2.0;
                    e += lh * lh + hl * hl + hh * hh;
                }
            }
            out.push(e);
            cur = next;
        }
        out
    }

    #[test]
    fn zero_translation_is_exactly_one() {
        let r = shift_invariance_probe(&disc(64), (0, 0), 4).unwrap();
        assert_eq!(r, vec![1.0; 4]);
    }

    #[test]
    fn one_pixel_shift_of_disc_is_near_invariant() {
        let img = disc(128);
        for t in [(0, 1), (1, 0), (1, 1)] {
            let ratios = shift_invariance_probe(&img, t, 4).unwrap();
            for (lvl, r) in ratios.iter().enumerate() {
                assert!((0.85..=1.15).contains(r), "shift {t:?} level {} ratio {r}", lvl + 1);
            }
        }
    }

    #[test]
    fn decimated_haar_is_not_shift_invariant() {
        // a bar whose edges sit on even columns: invisible to level-1 Haar
        // detail until shifted by one pixel
        let img = RealImage::from_fn(64, 64, |_, c| if (16..40).contains(&c) { 1.0 } else { 0.0 });
        let base = haar_level_energies(&img, 3);
        let shifted = haar_level_energies(&shift_image(&img, 0, 1), 3);
        let worst = shifted
            .iter()
            .zip(&base)
            .map(|(s, b)| if *b == 0.0 { f64::INFINITY } else { s / b })
            .map(|r| (r - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst > 0.15, "Haar deviation {worst}");

        let dtcwt = shift_invariance_probe(&img, (0, 1), 3).unwrap();
        for r in dtcwt {
            assert!((0.85..=1.15).contains(&r), "DTCWT ratio {r}");
        }
    }
}
