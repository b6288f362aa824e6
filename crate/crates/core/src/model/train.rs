use serde::{Deserialize, Serialize};

use super::SampleSet;
use crate::dtcwt::Dtcwt;
use crate::error::{invalid, Result};
use crate::graph::{subtrees_in_mask, threshold_top_energy, ChildMap, Selection, SUBTREE_DIM};
use crate::numerics::RealImage;
use crate::par;

/// How sub-tree phase vectors are harvested from training images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub levels: usize,
    /// Energy threshold applied per image over all detail coefficients.
    pub selection: Selection,
    pub child_map: ChildMap,
    /// Restrict to one orientation (0-based); pooled over all when `None`.
    pub orientation: Option<usize>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            selection: Selection::Fraction(0.2),
            child_map: ChildMap::Dyadic,
            orientation: None,
        }
    }
}

/// Raw phase vectors of the full sub-trees whose centre passes the energy
/// threshold, image by image in input order.
pub fn training_samples(images: &[RealImage], config: &SampleConfig) -> Result<SampleSet> {
    if images.is_empty() {
        return invalid("no training images");
    }
    let transform = Dtcwt::default();
    let per_image = par::map(images, |img| -> Result<Vec<f64>> {
        let p = transform.forward(img, config.levels)?;
        let mask = threshold_top_energy(&p, config.selection)?;
        let trees = subtrees_in_mask(&p, &mask, config.child_map)?;
        Ok(trees
            .iter()
            .filter(|t| config.orientation.is_none_or(|o| t.center.orientation == o))
            .flat_map(|t| t.phases)
            .collect())
    });
    let mut data = Vec::new();
    for v in per_image {
        data.extend(v?);
    }
    SampleSet::new(SUBTREE_DIM, data)
}
