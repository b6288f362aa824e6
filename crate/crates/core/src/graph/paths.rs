use rand::Rng;

use super::{randomize_phase_local, EnergyMask, NodeId};
use crate::dtcwt::{ComplexPyramid, ORIENTATIONS};
use crate::error::{invalid, Result};
use crate::numerics::angle;

/// Coefficients visited from a finest-level anchor up to the coarsest level
/// by repeated halving of the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePath {
    pub orientation: usize,
    pub row: usize,
    pub col: usize,
    /// `(phase, magnitude)` per level, finest first.
    pub steps: Vec<(f64, f64)>,
}

impl ScalePath {
    pub fn mean_magnitude(&self) -> f64 {
        self.steps.iter().map(|s| s.1).sum::<f64>() / self.steps.len() as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.steps.len()).map(move |i| {
            NodeId::new(i + 1, self.orientation, self.row >> i, self.col >> i)
        })
    }
}

fn all_paths(pyramid: &ComplexPyramid) -> Vec<ScalePath> {
    let (h, w) = pyramid.levels[0].band_dims();
    let mut out = Vec::with_capacity(ORIENTATIONS * h * w);
    for o in 0..ORIENTATIONS {
        for r in 0..h {
            for c in 0..w {
                let steps = (0..pyramid.num_levels())
                    .map(|i| {
                        let z = pyramid.band(i + 1, o).get(r >> i, c >> i);
                        (angle(z), z.norm())
                    })
                    .collect();
                out.push(ScalePath {
                    orientation: o,
                    row: r,
                    col: c,
                    steps,
                });
            }
        }
    }
    out
}

/// Paths whose mean magnitude is strictly below `threshold`.
pub fn low_energy_paths(pyramid: &ComplexPyramid, threshold: f64) -> Vec<ScalePath> {
    all_paths(pyramid)
        .into_iter()
        .filter(|p| p.mean_magnitude() < threshold)
        .collect()
}

/// Threshold for [`low_energy_paths`] selecting `fraction` of all paths
/// (exactly, unless mean magnitudes tie at the cut).
pub fn path_threshold_for_fraction(pyramid: &ComplexPyramid, fraction: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fraction) {
        return invalid(format!("fraction must be in [0, 1], got {fraction}"));
    }
    let mut means: Vec<f64> = all_paths(pyramid).iter().map(ScalePath::mean_magnitude).collect();
    means.sort_by(f64::total_cmp);
    let k = (fraction * means.len() as f64).round() as usize;
    Ok(if k == 0 {
        0.0
    } else if k >= means.len() {
        f64::INFINITY
    } else if means[k - 1] < means[k] {
        0.5 * (means[k - 1] + means[k])
    } else {
        means[k]
    })
}

/// Mask of every coefficient on any of `paths`.
pub fn path_mask(pyramid: &ComplexPyramid, paths: &[ScalePath]) -> EnergyMask {
    let mut mask = EnergyMask::empty(pyramid);
    for p in paths {
        for n in p.nodes() {
            mask.set(n, true);
        }
    }
    mask
}

/// Redraws the phase of every coefficient lying on a selected path. Shared
/// coarse coefficients are redrawn once.
pub fn randomize_paths<R: Rng + ?Sized>(
    pyramid: &ComplexPyramid,
    paths: &[ScalePath],
    rng: &mut R,
) -> Result<ComplexPyramid> {
    randomize_phase_local(pyramid, &path_mask(pyramid, paths), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtcwt::{dtcwt_forward, dtcwt_inverse};
    use crate::numerics::ssim;
    use crate::rng;
    use crate::synth::structured;

    #[test]
    fn zero_threshold_selects_nothing() {
        let p = dtcwt_forward(&structured(32, 32, 0), 3).unwrap();
        assert!(low_energy_paths(&p, 0.0).is_empty());
    }

    #[test]
    fn infinite_threshold_selects_every_path() {
        let p = dtcwt_forward(&structured(32, 32, 0), 3).unwrap();
        let paths = low_energy_paths(&p, f64::INFINITY);
        assert_eq!(paths.len(), 6 * 16 * 16);
        assert!(paths.iter().all(|p| p.steps.len() == 3));
    }

    #[test]
    fn fraction_threshold_hits_requested_count() {
        let p = dtcwt_forward(&structured(64, 64, 1), 4).unwrap();
        let total = 6 * 32 * 32;
        for f in [0.0, 0.29, 0.76, 0.97, 1.0] {
            let t = path_threshold_for_fraction(&p, f).unwrap();
            let n = low_energy_paths(&p, t).len();
            assert_eq!(n, (f * total as f64).round() as usize, "fraction {f}");
        }
    }

    #[test]
    fn path_randomization_keeps_magnitudes() {
        let p = dtcwt_forward(&structured(32, 32, 2), 3).unwrap();
        let t = path_threshold_for_fraction(&p, 0.5).unwrap();
        let q = randomize_paths(&p, &low_energy_paths(&p, t), &mut rng::seeded(9)).unwrap();
        for (a, b) in p.levels.iter().zip(&q.levels) {
            for (ba, bb) in a.bands.iter().zip(&b.bands) {
                for (x, y) in ba.data().iter().zip(bb.data()) {
                    assert!((x.norm() - y.norm()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn more_randomized_paths_cost_more_structure() {
        let fractions = [0.29, 0.76, 0.97];
        let mut mean = [0.0; 3];
        for seed in 0..5u64 {
            let img = structured(64, 64, seed);
            let p = dtcwt_forward(&img, 4).unwrap();
            for (k, &f) in fractions.iter().enumerate() {
                let t = path_threshold_for_fraction(&p, f).unwrap();
                let mut g = rng::substream(seed, "paths", k as u64);
                let q = randomize_paths(&p, &low_energy_paths(&p, t), &mut g).unwrap();
                mean[k] += ssim(&img, &dtcwt_inverse(&q).unwrap()).unwrap() / 5.0;
            }
        }
        assert!(mean[0] > mean[1] && mean[1] > mean[2], "{mean:?}");
    }
}
