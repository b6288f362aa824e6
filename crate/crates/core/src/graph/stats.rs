use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use super::{EnergyMask, NodeId};
use crate::dtcwt::{ComplexPyramid, ORIENTATIONS};
use crate::error::{invalid, Result};
use crate::numerics::stats::{kurtosis, ks_uniform_phase};
use crate::numerics::{angle, wrapped_diff, RealImage};
use crate::par;

/// Bins per axis of the joint phase-difference histogram.
pub const HISTOGRAM_BINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Strong,
    Weak,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Strong => "strong",
            Class::Weak => "weak",
        })
    }
}

/// Phase-marginal statistics of one band and class.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStat {
    pub level: usize,
    pub orientation: usize,
    pub class: Class,
    pub count: usize,
    /// KS distance to the uniform distribution; `None` for an empty class.
    pub ks_d: Option<f64>,
    /// `None` when fewer than 4 samples or zero variance.
    pub kurtosis: Option<f64>,
}

/// Joint histogram of `(phi_a - phi_{a+1}, phi_{a+1} - phi_{a+2})` over
/// the paths anchored at level `a` of one orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    pub orientation: usize,
    pub class: Class,
    pub levels: [usize; 3],
    /// Row index from the first difference, column from the second.
    pub counts: Vec<u32>,
    pub samples: usize,
    /// Largest bin count over the sample count.
    pub max_frequency: f64,
    pub kurtosis: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongWeakReport {
    pub bands: Vec<BandStat>,
    pub joints: Vec<JointHistogram>,
}

impl StrongWeakReport {
    pub fn bands_csv(&self) -> String {
        let mut s = String::from("level,orientation,class,count,ks_d,kurtosis\n");
        for b in &self.bands {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                b.level,
                b.orientation + 1,
                b.class,
                b.count,
                fmt_opt(b.ks_d),
                fmt_opt(b.kurtosis)
            );
        }
        s
    }

    pub fn joints_csv(&self) -> String {
        let mut s = String::from("orientation,class,levels,samples,max_frequency,kurtosis\n");
        for j in &self.joints {
            let _ = writeln!(
                s,
                "{},{},{}-{}-{},{},{},{}",
                j.orientation + 1,
                j.class,
                j.levels[0],
                j.levels[1],
                j.levels[2],
                j.samples,
                j.max_frequency,
                fmt_opt(j.kurtosis)
            );
        }
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn bin(d: f64) -> usize {
    (((d + PI) / (2.0 * PI) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
}

fn joint(pyramid: &ComplexPyramid, mask: &EnergyMask, o: usize, class: Class) -> JointHistogram {
    let a = pyramid.num_levels() - 2;
    let (h, w) = pyramid.band(a, o).dims();
    let mut counts = vec![0u32; HISTOGRAM_BINS * HISTOGRAM_BINS];
    let mut diffs = Vec::new();
    let mut samples = 0;
    for r in 0..h {
        for c in 0..w {
            let strong = mask.contains(NodeId::new(a, o, r, c));
            if strong != (class == Class::Strong) {
                continue;
            }
            let p0 = angle(pyramid.band(a, o).get(r, c));
            let p1 = angle(pyramid.band(a + 1, o).get(r / 2, c / 2));
            let p2 = angle(pyramid.band(a + 2, o).get(r / 4, c / 4));
            let (d1, d2) = (wrapped_diff(p0, p1), wrapped_diff(p1, p2));
            counts[bin(d1) * HISTOGRAM_BINS + bin(d2)] += 1;
            diffs.push(d1);
            diffs.push(d2);
            samples += 1;
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    JointHistogram {
        orientation: o,
        class,
        levels: [a, a + 1, a + 2],
        counts,
        samples,
        max_frequency: if samples == 0 { 0.0 } else { f64::from(max) / samples as f64 },
        kurtosis: kurtosis(&diffs).ok(),
    }
}

/// Marginal and joint phase statistics of the strong (masked) and weak
/// (unmasked) detail coefficients. Joint histograms use the three coarsest
/// detail levels.
pub fn strong_weak_statistics(pyramid: &ComplexPyramid, mask: &EnergyMask) -> Result<StrongWeakReport> {
    mask.check_layout(pyramid)?;
    if pyramid.num_levels() < 3 {
        return invalid("strong/weak statistics need at least 3 levels");
    }
    let strong = mask.count();
    if strong == 0 || strong == mask.len() {
        return invalid("strong/weak statistics need both classes to be non-empty");
    }
    let mut jobs = Vec::new();
    for level in 1..=pyramid.num_levels() {
        for o in 0..ORIENTATIONS {
            jobs.push((level, o));
        }
    }
    let bands = par::map(&jobs, |&(level, o)| {
        let band = pyramid.band(level, o);
        let (mut s, mut w) = (Vec::new(), Vec::new());
        for r in 0..band.height() {
            for c in 0..band.width() {
                let phi = angle(band.get(r, c));
                if mask.contains(NodeId::new(level, o, r, c)) {
                    s.push(phi);
                } else {
                    w.push(phi);
                }
            }
        }
        [(Class::Strong, s), (Class::Weak, w)].map(|(class, v)| BandStat {
            level,
            orientation: o,
            class,
            count: v.len(),
            ks_d: ks_uniform_phase(&v).ok(),
            kurtosis: kurtosis(&v).ok(),
        })
    })
    .into_iter()
    .flatten()
    .collect();
    let joint_jobs: Vec<(usize, Class)> = (0..ORIENTATIONS)
        .flat_map(|o| [(o, Class::Strong), (o, Class::Weak)])
        .collect();
    let joints = par::map(&joint_jobs, |&(o, class)| joint(pyramid, mask, o, class));
    Ok(StrongWeakReport { bands, joints })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub fraction: f64,
    pub orientation: usize,
    pub strong: f64,
    pub weak: f64,
}

/// Maximal joint-histogram frequency of both classes per orientation, with
/// the strong class taken as the top `fraction` of each band.
pub fn max_frequency_sweep(pyramid: &ComplexPyramid, fractions: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &f in fractions {
        let mask = EnergyMask::top_per_band(pyramid, f)?;
        let report = strong_weak_statistics(pyramid, &mask)?;
        for o in 0..ORIENTATIONS {
            let get = |class| {
                report
                    .joints
                    .iter()
                    .find(|j| j.orientation == o && j.class == class)
                    .map_or(0.0, |j| j.max_frequency)
            };
            rows.push(SweepRow {
                fraction: f,
                orientation: o,
                strong: get(Class::Strong),
                weak: get(Class::Weak),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("fraction,orientation,strong_max_frequency,weak_max_frequency\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.fraction, r.orientation + 1, r.strong, r.weak);
    }
    s
}

/// Histogram scaled to [0, 1] by its largest bin, for writing as a heatmap.
pub fn joint_histogram_pgm(hist: &JointHistogram) -> RealImage {
    let max = f64::from(hist.counts.iter().copied().max().unwrap_or(0)).max(1.0);
    RealImage::from_fn(HISTOGRAM_BINS, HISTOGRAM_BINS, |r, c| {
        f64::from(hist.counts[r * HISTOGRAM_BINS + c]) / max
    })
}
