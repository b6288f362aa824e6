use serde::{Deserialize, Serialize};

use super::{average_congruency, posterior_component, PhaseGmm};
use crate::dtcwt::Dtcwt;
use crate::error::Result;
use crate::graph::{extract_all_subtrees, threshold_top_energy, ChildMap, EnergyMask, NodeId, Selection};
use crate::numerics::RealImage;

/// Posterior probability required to mark a coefficient.
pub const MARKER_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub levels: usize,
    pub selection: Selection,
    /// Coefficients at or below this magnitude never qualify.
    pub min_magnitude: f64,
    pub child_map: ChildMap,
    pub threshold: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            selection: Selection::Fraction(0.2),
            min_magnitude: 1e-4,
            child_map: ChildMap::Dyadic,
            threshold: MARKER_THRESHOLD,
        }
    }
}

/// Coefficients attributed to one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMarkers {
    pub component: usize,
    pub congruency: f64,
    pub markers: Vec<NodeId>,
}

/// For each component, the intermediate-level coefficients of `image`
/// whose sub-tree it explains with posterior above the threshold. Only
/// coefficients passing the energy threshold are considered. Components
/// are returned in descending order of average congruency.
pub fn congruency_demo(model: &PhaseGmm, image: &RealImage, config: &DemoConfig) -> Result<Vec<ComponentMarkers>> {
    let p = Dtcwt::default().forward(image, config.levels)?;
    let top = threshold_top_energy(&p, config.selection)?;
    let strong = EnergyMask::above_magnitude(&p, config.min_magnitude);
    let mut out: Vec<ComponentMarkers> = (0..model.k())
        .map(|k| {
            Ok(ComponentMarkers {
                component: k,
                congruency: average_congruency(model, k)?,
                markers: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;
    for t in extract_all_subtrees(&p, config.child_map)? {
        if !(top.contains(t.center) && strong.contains(t.center)) {
            continue;
        }
        let (k, prob) = posterior_component(model, &t.phases);
        if prob > config.threshold {
            out[k].markers.push(t.center);
        }
    }
    out.sort_by(|a, b| b.congruency.total_cmp(&a.congruency).then(a.component.cmp(&b.component)));
    Ok(out)
}

/// Image-sized map with the footprint of every marked coefficient set to 1.
pub fn marker_map(markers: &[NodeId], height: usize, width: usize) -> RealImage {
    let mut map = RealImage::zeros(height, width);
    for n in markers {
        let s = 1usize << n.level;
        for r in n.row * s..((n.row + 1) * s).min(height) {
            for c in n.col * s..((n.col + 1) * s).min(width) {
                map.set(r, c, 1.0);
            }
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{em_fit, training_samples, EmConfig, SampleConfig};
    use crate::synth::{structured, texture_corpus};
    use rand::Rng;

    #[test]
    fn blank_image_has_no_markers() {
        let model = crate::model::tests::random_model(3, 10, 1);
        let maps = congruency_demo(&model, &RealImage::zeros(64, 64), &DemoConfig::default()).unwrap();
        assert!(maps.iter().all(|m| m.markers.is_empty()));
    }

    #[test]
    fn ranking_is_descending_and_bounded() {
        let corpus: Vec<RealImage> = texture_corpus(64, 12, 3).into_iter().map(|t| t.1).collect();
        let s = training_samples(&corpus, &SampleConfig::default()).unwrap();
        let fit = em_fit(&s, 4, &EmConfig { force: true, ..EmConfig::default() }).unwrap();
        let maps = congruency_demo(&fit.model, &structured(64, 64, 1), &DemoConfig::default()).unwrap();
        assert_eq!(maps.len(), 4);
        for w in maps.windows(2) {
            assert!(w[0].congruency >= w[1].congruency);
        }
        assert!(maps.iter().all(|m| (0.0..=1.0).contains(&m.congruency)));
    }

    #[test]
    fn noise_lands_in_the_incoherent_component() {
        // One tight coherent component far from the origin and one broad
        // zero-mean component: every sub-tree of a noise image is better
        // explained by the broad one.
        let mut coherent = vec![2.5; 10];
        coherent[9] = 1.25;
        coherent[5..9].iter_mut().for_each(|v| *v = 5.0);
        let model = PhaseGmm::new(
            vec![0.5, 0.5],
            vec![coherent, vec![0.0; 10]],
            vec![vec![0.01; 10], vec![3.3; 10]],
        )
        .unwrap();
        let mut g = crate::rng::seeded(2);
        let noise = RealImage::from_fn(64, 64, |_, _| g.random::<f64>());
        let maps = congruency_demo(&model, &noise, &DemoConfig::default()).unwrap();
        let incoherent = maps.iter().find(|m| m.component == 1).unwrap();
        let coherent = maps.iter().find(|m| m.component == 0).unwrap();
        assert!(incoherent.markers.len() > 10);
        assert!(coherent.markers.is_empty());
        assert!(coherent.congruency > incoherent.congruency - 1e-12);
    }

    #[test]
    fn marker_footprint() {
        let m = marker_map(&[NodeId::new(2, 0, 1, 0)], 16, 16);
        assert_eq!(m.data().iter().sum::<f64>(), 16.0);
        assert_eq!(m.get(4, 3), 1.0);
        assert_eq!(m.get(3, 3), 0.0);
    }
}
