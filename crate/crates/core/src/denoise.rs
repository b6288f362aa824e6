//! MMSE estimation of local phase under the mixture prior.
//!
//! For an observation `theta = eta + w` with `w ~ N(0, sigma2 I)` the
//! posterior mean under a diagonal mixture is
//! `sum_k g_k (sigma2 mu_k + Sigma_k theta) / (Sigma_k + sigma2)` with
//! weights `g_k` proportional to `pi_k N(theta; mu_k, Sigma_k + sigma2 I)`.
//! Absent neighbours are dropped by restricting every Gaussian to the
//! present coordinates.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dtcwt::{ComplexPyramid, Dtcwt};
use crate::error::{invalid, mismatch, Error, Result};
use crate::graph::{neighborhood_with_phases, ChildMap, NodeId, SLOT_CENTER};
use crate::model::{softmax_in_place, PhaseGmm};
use crate::numerics::{angle, wrap, RealImage};
use crate::par;

/// Noisy phases of one neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyPhaseObservation {
    pub theta: Vec<f64>,
    pub sigma2: f64,
    pub present: Vec<bool>,
}

impl NoisyPhaseObservation {
    pub fn full(theta: Vec<f64>, sigma2: f64) -> Self {
        let present = vec![true; theta.len()];
        Self {
            theta,
            sigma2,
            present,
        }
    }
}

/// Posterior mixture weights of the observation (present slots only).
pub fn posterior_weights(model: &PhaseGmm, obs: &NoisyPhaseObservation) -> Result<Vec<f64>> {
    if obs.theta.len() != model.dim() || obs.present.len() != model.dim() {
        return mismatch(model.dim(), obs.theta.len());
    }
    if !(obs.sigma2 >= 0.0) || !obs.sigma2.is_finite() {
        return invalid(format!("noise variance must be finite and >= 0, got {}", obs.sigma2));
    }
    if !obs.present.iter().any(|&p| p) {
        return invalid("neighbourhood has no observed slot");
    }
    let mut w = vec![0.0; model.k()];
    model.log_joint(&obs.theta, obs.sigma2, Some(&obs.present), &mut w);
    softmax_in_place(&mut w);
    Ok(w)
}

/// Posterior-mean estimate of the clean phases. Absent slots are returned
/// unchanged from `obs.theta`.
pub fn denoise_subtree(model: &PhaseGmm, obs: &NoisyPhaseObservation) -> Result<Vec<f64>> {
    let w = posterior_weights(model, obs)?;
    if obs.sigma2 == 0.0 {
        return Ok(obs.theta.clone());
    }
    let s2 = obs.sigma2;
    let mut out = obs.theta.clone();
    for (d, o) in out.iter_mut().enumerate() {
        if !obs.present[d] {
            continue;
        }
        let theta = obs.theta[d];
        *o = (0..model.k())
            .map(|k| {
                let v = model.variances[k][d];
                w[k] * (s2 * model.means[k][d] + v * theta) / (v + s2)
            })
            .sum();
    }
    Ok(out)
}

/// Per-band phase arrays indexed `[level - 1][orientation]`. Values need
/// not lie in (-pi, pi].
pub type PhaseField = Vec<Vec<RealImage>>;

/// Angles of every detail coefficient.
pub fn phase_field(pyramid: &ComplexPyramid) -> PhaseField {
    pyramid
        .levels
        .iter()
        .map(|l| {
            l.bands
                .iter()
                .map(|b| RealImage::from_fn(b.height(), b.width(), |r, c| angle(b.get(r, c))))
                .collect()
        })
        .collect()
}

/// Replaces every detail phase by the centre-slot estimate of its
/// (possibly partial) neighbourhood. Estimates read only the input pyramid;
/// magnitudes and the lowpass band are copied unchanged.
pub fn denoise_pyramid_phase(
    pyramid: &ComplexPyramid,
    model: &PhaseGmm,
    sigma2: f64,
    map: ChildMap,
) -> Result<ComplexPyramid> {
    if sigma2 == 0.0 && model.dim() == crate::graph::SUBTREE_DIM {
        return Ok(pyramid.clone());
    }
    denoise_phase_field(pyramid, &phase_field(pyramid), model, sigma2, map)
}

/// As [`denoise_pyramid_phase`], with observed phases taken from `phases`
/// (for example unwrapped noisy phases) and magnitudes from `pyramid`.
/// Estimates are wrapped only when written back.
pub fn denoise_phase_field(
    pyramid: &ComplexPyramid,
    phases: &PhaseField,
    model: &PhaseGmm,
    sigma2: f64,
    map: ChildMap,
) -> Result<ComplexPyramid> {
    if model.dim() != crate::graph::SUBTREE_DIM {
        return invalid(format!("model dimension {} is not 10", model.dim()));
    }
    check_field(pyramid, phases)?;
    let mut out = pyramid.clone();
    for (li, lvl) in out.levels.iter_mut().enumerate() {
        for (o, band) in lvl.bands.iter_mut().enumerate() {
            let (h, w) = band.dims();
            let rows = par::map_range(h, |r| -> Result<Vec<Complex64>> {
                (0..w)
                    .map(|c| {
                        let t = neighborhood_with_phases(pyramid, phases, NodeId::new(li + 1, o, r, c), map);
                        let obs = NoisyPhaseObservation {
                            theta: t.phases.to_vec(),
                            sigma2,
                            present: t.present.to_vec(),
                        };
                        let est = denoise_subtree(model, &obs)?;
                        Ok(Complex64::from_polar(t.magnitudes[SLOT_CENTER], wrap(est[SLOT_CENTER])))
                    })
                    .collect()
            });
            for (r, row) in rows.into_iter().enumerate() {
                for (c, z) in row?.into_iter().enumerate() {
                    band.set(r, c, z);
                }
            }
        }
    }
    Ok(out)
}

fn check_field(pyramid: &ComplexPyramid, phases: &PhaseField) -> Result<()> {
    let ok = phases.len() == pyramid.num_levels()
        && pyramid.levels.iter().zip(phases).all(|(l, f)| {
            f.len() == l.bands.len() && l.bands.iter().zip(f).all(|(b, p)| b.dims() == p.dims())
        });
    if ok {
        Ok(())
    } else {
        invalid("phase field does not match the pyramid layout")
    }
}

/// Decomposes, denoises every detail phase and synthesizes.
pub fn denoise_image_phase(
    image: &RealImage,
    levels: usize,
    model: &PhaseGmm,
    sigma2: f64,
) -> Result<RealImage> {
    let t = Dtcwt::default();
    let p = t.forward(image, levels)?;
    t.inverse(&denoise_pyramid_phase(&p, model, sigma2, ChildMap::Dyadic)?)
}

/// Adds i.i.d. `N(0, sigma^2)` noise to every detail phase and re-wraps.
/// Draws happen in canonical node order.
pub fn degrade_local_phase<R: Rng + ?Sized>(
    pyramid: &ComplexPyramid,
    sigma: f64,
    rng: &mut R,
) -> Result<ComplexPyramid> {
    Ok(degrade_phase_field(pyramid, sigma, rng)?.0)
}

/// Same draws as [`degrade_local_phase`], also returning the noisy phases
/// before wrapping.
pub fn degrade_phase_field<R: Rng + ?Sized>(
    pyramid: &ComplexPyramid,
    sigma: f64,
    rng: &mut R,
) -> Result<(ComplexPyramid, PhaseField)> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be finite and >= 0, got {sigma}"));
    }
    let mut field = phase_field(pyramid);
    if sigma == 0.0 {
        return Ok((pyramid.clone(), field));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut out = pyramid.clone();
    for (lvl, fl) in out.levels.iter_mut().zip(&mut field) {
        for (band, fb) in lvl.bands.iter_mut().zip(fl) {
            for (z, phi) in band.data_mut().iter_mut().zip(fb.data_mut()) {
                *phi += normal.sample(rng);
                *z = Complex64::from_polar(z.norm(), wrap(*phi));
            }
        }
    }
    Ok((out, field))
}
