use serde::{Deserialize, Serialize};

use super::NodeId;
use crate::dtcwt::ComplexPyramid;
use crate::error::{invalid, Result};

/// How many coefficients a threshold keeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Count(usize),
    /// Fraction of all detail coefficients, rounded to the nearest count.
    Fraction(f64),
}

/// Per-node selection flags over the detail bands of a pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMask {
    /// `flags[level - 1][orientation]`, row-major per band.
    flags: Vec<Vec<Vec<bool>>>,
    dims: Vec<(usize, usize)>,
    pub selection: Option<Selection>,
}

impl EnergyMask {
    fn filled(pyramid: &ComplexPyramid, value: bool) -> Self {
        Self {
            flags: pyramid
                .levels
                .iter()
                .map(|l| l.bands.iter().map(|b| vec![value; b.len()]).collect())
                .collect(),
            dims: pyramid.levels.iter().map(|l| l.band_dims()).collect(),
            selection: None,
        }
    }

    pub fn empty(pyramid: &ComplexPyramid) -> Self {
        Self::filled(pyramid, false)
    }

    pub fn full(pyramid: &ComplexPyramid) -> Self {
        Self::filled(pyramid, true)
    }

    /// Every detail coefficient with magnitude strictly above `threshold`.
    pub fn above_magnitude(pyramid: &ComplexPyramid, threshold: f64) -> Self {
        let mut mask = Self::empty(pyramid);
        for (li, lvl) in pyramid.levels.iter().enumerate() {
            for (o, band) in lvl.bands.iter().enumerate() {
                for (f, z) in mask.flags[li][o].iter_mut().zip(band.data()) {
                    *f = z.norm() > threshold;
                }
            }
        }
        mask
    }

    /// Top `fraction` of each band separately, same tie-break as
    /// [`threshold_top_energy`].
    pub fn top_per_band(pyramid: &ComplexPyramid, fraction: f64) -> Result<Self> {
        check_fraction(fraction)?;
        let mut mask = Self::empty(pyramid);
        for (li, lvl) in pyramid.levels.iter().enumerate() {
            for (o, band) in lvl.bands.iter().enumerate() {
                let mut order: Vec<usize> = (0..band.len()).collect();
                let data = band.data();
                order.sort_by(|&a, &b| data[b].norm().total_cmp(&data[a].norm()).then(a.cmp(&b)));
                let keep = (fraction * band.len() as f64).round() as usize;
                for &i in order.iter().take(keep) {
                    mask.flags[li][o][i] = true;
                }
            }
        }
        Ok(mask)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        let w = self.dims[node.level - 1].1;
        self.flags[node.level - 1][node.orientation][node.row * w + node.col]
    }

    pub fn set(&mut self, node: NodeId, value: bool) {
        let w = self.dims[node.level - 1].1;
        self.flags[node.level - 1][node.orientation][node.row * w + node.col] = value;
    }

    pub fn count(&self) -> usize {
        self.flags.iter().flatten().flatten().filter(|&&f| f).count()
    }

    pub fn len(&self) -> usize {
        self.flags.iter().flatten().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn complement(&self) -> Self {
        Self {
            flags: self
                .flags
                .iter()
                .map(|l| l.iter().map(|b| b.iter().map(|f| !f).collect()).collect())
                .collect(),
            dims: self.dims.clone(),
            selection: None,
        }
    }

    pub fn is_subset_of(&self, other: &EnergyMask) -> bool {
        self.dims == other.dims
            && self
                .flags
                .iter()
                .flatten()
                .flatten()
                .zip(other.flags.iter().flatten().flatten())
                .all(|(&a, &b)| !a || b)
    }

    /// Selected nodes in canonical order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.flags.iter().enumerate().flat_map(move |(li, lvl)| {
            let w = self.dims[li].1;
            lvl.iter().enumerate().flat_map(move |(o, band)| {
                band.iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(move |(i, _)| NodeId::new(li + 1, o, i / w, i % w))
            })
        })
    }

    pub(crate) fn check_layout(&self, pyramid: &ComplexPyramid) -> Result<()> {
        let dims: Vec<_> = pyramid.levels.iter().map(|l| l.band_dims()).collect();
        if dims != self.dims {
            return invalid("mask layout does not match the pyramid");
        }
        Ok(())
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return invalid(format!("fraction must be in [0, 1], got {fraction}"));
    }
    Ok(())
}

/// Selects the largest-magnitude detail coefficients across all levels and
/// orientations. Ties go to the lower [`NodeId`], so masks for increasing
/// counts are nested.
pub fn threshold_top_energy(pyramid: &ComplexPyramid, selection: Selection) -> Result<EnergyMask> {
    let total = pyramid.detail_count();
    let count = match selection {
        Selection::Count(n) => {
            if n > total {
                return invalid(format!("count {n} exceeds {total} detail coefficients"));
            }
            n
        }
        Selection::Fraction(f) => {
            check_fraction(f)?;
            (f * total as f64).round() as usize
        }
    };
    // canonical node order is the order of this flattening
    let mut mags: Vec<(f64, usize)> = pyramid
        .levels
        .iter()
        .flat_map(|l| l.bands.iter())
        .flat_map(|b| b.data().iter().map(|z| z.norm()))
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    mags.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut chosen = vec![false; total];
    for &(_, i) in mags.iter().take(count) {
        chosen[i] = true;
    }
    let mut mask = EnergyMask::empty(pyramid);
    let mut it = chosen.into_iter();
    for lvl in &mut mask.flags {
        for band in lvl {
            for f in band.iter_mut() {
                *f = it.next().unwrap_or(false);
            }
        }
    }
    mask.selection = Some(selection);
    Ok(mask)
}
