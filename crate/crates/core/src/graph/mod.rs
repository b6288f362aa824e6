//! Wavelet-graph view of a pyramid.
//!
//! Every detail coefficient is a node. Its neighbours are the four
//! 4-connected coefficients in the same band, four children in the next
//! finer level and one parent in the next coarser level, all in the same
//! orientation. The ten phases are packed as
//! `[centre, left, up, right, down, child x4, parent]`.

mod mask;
mod paths;
mod stats;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use mask::{threshold_top_energy, EnergyMask, Selection};
pub use paths::{
    low_energy_paths, path_mask, path_threshold_for_fraction, randomize_paths, ScalePath,
};
pub use stats::{
    joint_histogram_pgm, max_frequency_sweep, strong_weak_statistics, sweep_csv, BandStat, Class,
    JointHistogram, StrongWeakReport, SweepRow, HISTOGRAM_BINS,
};

use crate::dtcwt::{ComplexPyramid, Dtcwt, ORIENTATIONS};
use crate::error::{invalid, Result};
use crate::numerics::{angle, RealImage};
use crate::par;

/// Length of a sub-tree vector.
pub const SUBTREE_DIM: usize = 10;

pub const SLOT_CENTER: usize = 0;
pub const SLOTS_SPATIAL: std::ops::Range<usize> = 1..5;
pub const SLOTS_CHILDREN: std::ops::Range<usize> = 5..9;
pub const SLOT_PARENT: usize = 9;

/// A detail coefficient. Field order gives the canonical node ordering used
/// for tie-breaks: level, orientation, row, column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    /// 1 = finest.
    pub level: usize,
    /// 0-based band index (orientation 1..6 in documentation order).
    pub orientation: usize,
    pub row: usize,
    pub col: usize,
}

impl NodeId {
    pub fn new(level: usize, orientation: usize, row: usize, col: usize) -> Self {
        Self {
            level,
            orientation,
            row,
            col,
        }
    }
}

/// How the four children of a node are located on the finer level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChildMap {
    /// The 2x2 block `(2r + dr, 2c + dc)` covering the same location.
    #[default]
    Dyadic,
    /// The 4-neighbour cross around the co-located finer coefficient
    /// `(2r, 2c)`: left, up, right, down.
    Cross,
}

impl ChildMap {
    fn offsets(self) -> [(isize, isize); 4] {
        match self {
            ChildMap::Dyadic => [(0, 0), (0, 1), (1, 0), (1, 1)],
            ChildMap::Cross => [(0, -1), (-1, 0), (0, 1), (1, 0)],
        }
    }
}

const SPATIAL_OFFSETS: [(isize, isize); 4] = [(0, -1), (-1, 0), (0, 1), (1, 0)];

/// The ten-coefficient neighbourhood of a node. Slots whose coefficient
/// falls outside the pyramid are marked absent and hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SubTree {
    pub center: NodeId,
    pub phases: [f64; SUBTREE_DIM],
    pub magnitudes: [f64; SUBTREE_DIM],
    pub present: [bool; SUBTREE_DIM],
}

impl SubTree {
    pub fn is_full(&self) -> bool {
        self.present.iter().all(|&p| p)
    }
}

fn offset(base: usize, d: isize, limit: usize) -> Option<usize> {
    let v = base as isize + d;
    (v >= 0 && (v as usize) < limit).then_some(v as usize)
}

/// Neighbourhood of `node`, with absent slots flagged.
pub fn neighborhood(pyramid: &ComplexPyramid, node: NodeId, map: ChildMap) -> SubTree {
    gather(pyramid, node, map, |l, o, r, c| angle(pyramid.band(l, o).get(r, c)))
}

/// Like [`neighborhood`], but phases come from `phases[level - 1][orientation]`
/// instead of the coefficient angles. Used for unwrapped phase fields.
pub fn neighborhood_with_phases(
    pyramid: &ComplexPyramid,
    phases: &[Vec<RealImage>],
    node: NodeId,
    map: ChildMap,
) -> SubTree {
    gather(pyramid, node, map, |l, o, r, c| phases[l - 1][o].get(r, c))
}

fn gather(
    pyramid: &ComplexPyramid,
    node: NodeId,
    map: ChildMap,
    phase: impl Fn(usize, usize, usize, usize) -> f64,
) -> SubTree {
    let mut pos: [Option<(usize, usize, usize)>; SUBTREE_DIM] = [None; SUBTREE_DIM];
    let (h, w) = pyramid.band(node.level, node.orientation).dims();
    pos[SLOT_CENTER] = Some((node.level, node.row, node.col));
    for (k, &(dr, dc)) in SPATIAL_OFFSETS.iter().enumerate() {
        if let (Some(r), Some(c)) = (offset(node.row, dr, h), offset(node.col, dc, w)) {
            pos[SLOTS_SPATIAL.start + k] = Some((node.level, r, c));
        }
    }
    if node.level > 1 {
        let (fh, fw) = pyramid.band(node.level - 1, node.orientation).dims();
        for (k, &(dr, dc)) in map.offsets().iter().enumerate() {
            if let (Some(r), Some(c)) = (offset(2 * node.row, dr, fh), offset(2 * node.col, dc, fw)) {
                pos[SLOTS_CHILDREN.start + k] = Some((node.level - 1, r, c));
            }
        }
    }
    if node.level < pyramid.num_levels() {
        let coarse = pyramid.band(node.level + 1, node.orientation);
        let (r, c) = (node.row / 2, node.col / 2);
        if r < coarse.height() && c < coarse.width() {
            pos[SLOT_PARENT] = Some((node.level + 1, r, c));
        }
    }
    let mut tree = SubTree {
        center: node,
        phases: [0.0; SUBTREE_DIM],
        magnitudes: [0.0; SUBTREE_DIM],
        present: [false; SUBTREE_DIM],
    };
    for (k, p) in pos.iter().enumerate() {
        if let Some((l, r, c)) = *p {
            tree.phases[k] = phase(l, node.orientation, r, c);
            tree.magnitudes[k] = pyramid.band(l, node.orientation).get(r, c).norm();
            tree.present[k] = true;
        }
    }
    tree
}

fn check_depth(pyramid: &ComplexPyramid) -> Result<()> {
    if pyramid.num_levels() < 3 {
        return invalid(format!(
            "sub-trees need at least 3 levels, pyramid has {}",
            pyramid.num_levels()
        ));
    }
    Ok(())
}

fn band_subtrees(pyramid: &ComplexPyramid, level: usize, o: usize, map: ChildMap) -> Vec<SubTree> {
    let (h, w) = pyramid.band(level, o).dims();
    let rows: Vec<usize> = (1..h.saturating_sub(1)).collect();
    par::map(&rows, |&r| {
        (1..w - 1)
            .map(|c| neighborhood(pyramid, NodeId::new(level, o, r, c), map))
            .filter(SubTree::is_full)
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Full sub-trees of one orientation, in node order. Only intermediate
/// levels away from the band border qualify.
pub fn extract_subtrees(
    pyramid: &ComplexPyramid,
    orientation: usize,
    map: ChildMap,
) -> Result<Vec<SubTree>> {
    check_depth(pyramid)?;
    if orientation >= ORIENTATIONS {
        return invalid(format!("orientation index {orientation} out of range"));
    }
    Ok((2..pyramid.num_levels())
        .flat_map(|level| band_subtrees(pyramid, level, orientation, map))
        .collect())
}

/// Full sub-trees of all orientations, in node order.
pub fn extract_all_subtrees(pyramid: &ComplexPyramid, map: ChildMap) -> Result<Vec<SubTree>> {
    check_depth(pyramid)?;
    Ok((2..pyramid.num_levels())
        .flat_map(|level| (0..ORIENTATIONS).map(move |o| (level, o)))
        .flat_map(|(level, o)| band_subtrees(pyramid, level, o, map))
        .collect())
}

/// Full sub-trees whose centre is selected by `mask`.
pub fn subtrees_in_mask(
    pyramid: &ComplexPyramid,
    mask: &EnergyMask,
    map: ChildMap,
) -> Result<Vec<SubTree>> {
    Ok(extract_all_subtrees(pyramid, map)?
        .into_iter()
        .filter(|t| mask.contains(t.center))
        .collect())
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    crate::numerics::wrap(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Redraws the phase of every masked coefficient uniformly, keeping its
/// magnitude. Draws happen in node order.
pub fn randomize_phase_local<R: Rng + ?Sized>(
    pyramid: &ComplexPyramid,
    mask: &EnergyMask,
    rng: &mut R,
) -> Result<ComplexPyramid> {
    mask.check_layout(pyramid)?;
    let mut out = pyramid.clone();
    for node in mask.nodes() {
        let band = out.band_mut(node.level, node.orientation);
        let z = band.get(node.row, node.col);
        band.set(node.row, node.col, Complex64::from_polar(z.norm(), uniform_phase(rng)));
    }
    Ok(out)
}

/// Replaces every detail phase of `degraded`'s decomposition by the phase of
/// `reference`, keeping the degraded magnitudes, and synthesizes.
pub fn project_local_phase(degraded: &RealImage, reference: &ComplexPyramid) -> Result<RealImage> {
    if degraded.dims() != (reference.meta.height, reference.meta.width) {
        return crate::error::mismatch(
            format!("{}x{}", reference.meta.height, reference.meta.width),
            format!("{}x{}", degraded.height(), degraded.width()),
        );
    }
    let transform = Dtcwt::default();
    let mut pyr = transform.forward(degraded, reference.num_levels())?;
    if !pyr.same_layout(reference) {
        return invalid("reference pyramid layout differs from the degraded decomposition");
    }
    for (lvl, ref_lvl) in pyr.levels.iter_mut().zip(&reference.levels) {
        for (band, ref_band) in lvl.bands.iter_mut().zip(&ref_lvl.bands) {
            for (z, r) in band.data_mut().iter_mut().zip(ref_band.data()) {
                *z = Complex64::from_polar(z.norm(), angle(*r));
            }
        }
    }
    transform.inverse(&pyr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtcwt::dtcwt_forward;
    use crate::numerics::{perturb_global_phase, ssim};
    use crate::rng;
    use crate::synth::structured;

    fn pyramid(n: usize, levels: usize) -> ComplexPyramid {
        dtcwt_forward(&structured(n, n, 0), levels).unwrap()
    }

    #[test]
    fn interior_count_on_4x4_band() {
        // 32x32 with 4 levels: level-3 bands are 4x4 with 8x8 children and
        // a 2x2 parent, so only the 2x2 interior survives.
        let p = pyramid(32, 4);
        let trees = extract_subtrees(&p, 0, ChildMap::Dyadic).unwrap();
        let at3 = trees.iter().filter(|t| t.center.level == 3).count();
        assert_eq!(at3, 4);
        let at2 = trees.iter().filter(|t| t.center.level == 2).count();
        assert_eq!(at2, 36);
    }

    #[test]
    fn center_slot_reads_the_pyramid() {
        let p = pyramid(32, 3);
        for t in extract_subtrees(&p, 2, ChildMap::Dyadic).unwrap() {
            let z = p.band(t.center.level, 2).get(t.center.row, t.center.col);
            assert_eq!(t.phases[SLOT_CENTER], angle(z));
            assert_eq!(t.magnitudes[SLOT_CENTER], z.norm());
        }
    }

    #[test]
    fn slot_layout_matches_neighbours() {
        let p = pyramid(32, 3);
        let node = NodeId::new(2, 1, 3, 4);
        let t = neighborhood(&p, node, ChildMap::Dyadic);
        let b = p.band(2, 1);
        assert_eq!(t.phases[1], angle(b.get(3, 3)));
        assert_eq!(t.phases[2], angle(b.get(2, 4)));
        assert_eq!(t.phases[3], angle(b.get(3, 5)));
        assert_eq!(t.phases[4], angle(b.get(4, 4)));
        let f = p.band(1, 1);
        assert_eq!(t.phases[5], angle(f.get(6, 8)));
        assert_eq!(t.phases[8], angle(f.get(7, 9)));
        assert_eq!(t.phases[9], angle(p.band(3, 1).get(1, 2)));

        let x = neighborhood(&p, node, ChildMap::Cross);
        assert_eq!(x.phases[5], angle(f.get(6, 7)));
        assert_eq!(x.phases[6], angle(f.get(5, 8)));
        assert_eq!(x.phases[7], angle(f.get(6, 9)));
        assert_eq!(x.phases[8], angle(f.get(7, 8)));
    }

    #[test]
    fn partial_neighbourhoods_flag_missing_slots() {
        let p = pyramid(32, 3);
        let corner = neighborhood(&p, NodeId::new(1, 0, 0, 0), ChildMap::Dyadic);
        assert_eq!(
            corner.present,
            [true, false, false, true, true, false, false, false, false, true]
        );
        let top = neighborhood(&p, NodeId::new(3, 0, 2, 2), ChildMap::Dyadic);
        assert!(!top.present[SLOT_PARENT]);
        assert!(top.present[SLOTS_CHILDREN].iter().all(|&b| b));
    }

    #[test]
    fn too_shallow_is_rejected() {
        let p = pyramid(32, 2);
        assert!(extract_subtrees(&p, 0, ChildMap::Dyadic).is_err());
    }

    #[test]
    fn extraction_is_deterministic_and_in_range() {
        let p = pyramid(64, 4);
        let a = extract_all_subtrees(&p, ChildMap::Dyadic).unwrap();
        let b = extract_all_subtrees(&p, ChildMap::Dyadic).unwrap();
        assert_eq!(a, b);
        let pi = std::f64::consts::PI;
        for t in &a {
            assert!(t.phases.iter().all(|&v| v > -pi && v <= pi));
            assert!(t.magnitudes.iter().all(|&m| m >= 0.0));
        }
        let mut sorted = a.iter().map(|t| t.center).collect::<Vec<_>>();
        sorted.sort();
        assert_eq!(sorted, a.iter().map(|t| t.center).collect::<Vec<_>>());
    }

    #[test]
    fn constant_image_leaves_no_selected_subtrees() {
        let p = dtcwt_forward(&RealImage::filled(64, 64, 0.7), 4).unwrap();
        let mask = EnergyMask::above_magnitude(&p, 1e-3);
        assert_eq!(mask.count(), 0);
        assert!(subtrees_in_mask(&p, &mask, ChildMap::Dyadic).unwrap().is_empty());
    }

    #[test]
    fn empty_mask_randomization_is_identity() {
        let p = pyramid(32, 3);
        let mask = EnergyMask::empty(&p);
        let mut g = rng::seeded(1);
        let q = randomize_phase_local(&p, &mask, &mut g).unwrap();
        assert_eq!(p, q);
        let a = crate::dtcwt::dtcwt_inverse(&p).unwrap();
        let b = crate::dtcwt::dtcwt_inverse(&q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn local_randomization_keeps_magnitudes() {
        let p = pyramid(64, 4);
        let mask = threshold_top_energy(&p, Selection::Fraction(0.2)).unwrap().complement();
        let q = randomize_phase_local(&p, &mask, &mut rng::seeded(3)).unwrap();
        let mut changed = 0;
        for (a, b) in p.levels.iter().zip(&q.levels) {
            for (ba, bb) in a.bands.iter().zip(&b.bands) {
                for (x, y) in ba.data().iter().zip(bb.data()) {
                    assert!((x.norm() - y.norm()).abs() < 1e-12);
                    changed += usize::from(x != y);
                }
            }
        }
        assert!(changed > mask.count() / 2);
        assert_eq!(p.lowpass, q.lowpass);
    }

    #[test]
    fn local_randomization_beats_global_at_equal_count() {
        // Randomize the weakest 80% of local phases and the same number of
        // weakest global phase bins; the local variant keeps more structure.
        for seed in 0..5u64 {
            let img = structured(64, 64, seed);
            let p = dtcwt_forward(&img, 4).unwrap();
            let mask = threshold_top_energy(&p, Selection::Fraction(0.2)).unwrap().complement();
            let mut g = rng::substream(seed, "local", 0);
            let local = crate::dtcwt::dtcwt_inverse(&randomize_phase_local(&p, &mask, &mut g).unwrap())
                .unwrap();
            let fraction = mask.count() as f64 / (64.0 * 64.0);
            let mut g = rng::substream(seed, "global", 0);
            let global =
                crate::numerics::randomize_global_phase_fraction(&img, fraction.min(1.0), &mut g)
                    .unwrap();
            let s_local = ssim(&img, &local).unwrap();
            let s_global = ssim(&img, &global).unwrap();
            assert!(s_local > s_global, "seed {seed}: local {s_local} global {s_global}");
        }
    }

    #[test]
    fn projection_with_own_phase_is_identity() {
        let img = structured(64, 64, 4);
        let p = dtcwt_forward(&img, 4).unwrap();
        let out = project_local_phase(&img, &p).unwrap();
        assert!(out.max_abs_diff(&img) < 1e-9);
    }

    #[test]
    fn projection_repairs_global_phase_noise() {
        for seed in 0..5u64 {
            let img = structured(64, 64, seed);
            let p = dtcwt_forward(&img, 4).unwrap();
            let noisy = perturb_global_phase(&img, 1.5, &mut rng::substream(seed, "noise", 0)).unwrap();
            let fixed = project_local_phase(&noisy, &p).unwrap();
            let before = ssim(&img, &noisy).unwrap();
            let after = ssim(&img, &fixed).unwrap();
            assert!(after > before, "seed {seed}: {before} -> {after}");
        }
    }

    #[test]
    fn projection_with_zero_reference_stays_finite() {
        let img = RealImage::from_fn(32, 32, |r, c| if (r / 4 + c / 4) % 2 == 0 { 1.0 } else { 0.0 });
        let p = dtcwt_forward(&img, 3).unwrap().zeros_like();
        let out = project_local_phase(&img, &p).unwrap();
        assert!(out.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn projection_rejects_mismatch() {
        let p = pyramid(32, 3);
        assert!(project_local_phase(&RealImage::zeros(64, 64), &p).is_err());
    }
}
