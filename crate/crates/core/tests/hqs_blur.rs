//! Deblurring benchmark for the splitting restorer on synthetic fixtures.

use phaseforge::graph::Selection;
use phaseforge::hqs::{hqs_restore, DegradationOperator, HqsSchedule};
use phaseforge::model::{em_fit, training_samples, EmConfig, SampleConfig};
use phaseforge::numerics::{psnr, RealImage};
use phaseforge::rng;
use phaseforge::synth::{structured, texture_corpus};
use rand_distr::{Distribution, Normal};

const NOISE: f64 = 0.001;

#[test]
fn deblurring_improves_psnr_and_keeps_fidelity() {
    let train: Vec<RealImage> = texture_corpus(64, 48, 1).into_iter().map(|t| t.1).collect();
    let cfg = SampleConfig { selection: Selection::Fraction(0.2), ..SampleConfig::default() };
    let samples = training_samples(&train, &cfg).unwrap();
    let model = em_fit(&samples, 10, &EmConfig { seed: 1, ..EmConfig::default() }).unwrap().model;

    let mut fixtures: Vec<RealImage> = texture_corpus(64, 4, 77).into_iter().map(|t| t.1).collect();
    fixtures.push(structured(64, 64, 5));
    let h = DegradationOperator::gaussian_blur(5, 1.0).unwrap();
    let schedule = HqsSchedule { alphas: vec![1.0, 4.0, 16.0], ..HqsSchedule::default() }.with_noise_sigma(NOISE);
    for (i, x) in fixtures.iter().enumerate() {
        let normal = Normal::new(0.0, NOISE).unwrap();
        let mut g = rng::substream(9, "hqs-noise", i as u64);
        let hx = h.apply(x);
        let y = RealImage::from_fn(64, 64, |r, c| hx.get(r, c) + normal.sample(&mut g));
        let out = hqs_restore(&y, &h, &model, &schedule).unwrap();
        let fid = |v: &RealImage| -> f64 { h.apply(v).data().iter().zip(y.data()).map(|(a, b)| (a - b).powi(2)).sum() };
        assert!(fid(&out.image) <= fid(&y), "fixture {i}: fidelity {} > {}", fid(&out.image), fid(&y));
        let (before, after) = (psnr(x, &y).unwrap(), psnr(x, &out.image).unwrap());
        assert!(after >= before, "fixture {i}: PSNR {after} < {before}");
    }
}
