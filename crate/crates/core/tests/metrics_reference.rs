//! PSNR/SSIM against values frozen from scikit-image
//! (`structural_similarity` with gaussian_weights, sigma 1.5,
//! use_sample_covariance=False, data_range 1; `peak_signal_noise_ratio`
//! with data_range 1).

use phaseforge::numerics::{psnr, ssim, RealImage};

fn hashed(k: usize) -> RealImage {
    RealImage::from_fn(24, 28, |r, c| (((r * 31 + c * 17 + k * 7).pow(2) + r * c * k) % 101) as f64 / 100.0)
}

fn smooth(k: usize) -> RealImage {
    let k = k as f64;
    RealImage::from_fn(24, 28, |r, c| {
        0.5 + 0.4 * (r as f64 / (3.0 + k)).sin() * (c as f64 / (4.0 + k)).cos()
    })
}

fn blend(a: &RealImage, b: &RealImage, t: f64) -> RealImage {
    RealImage::from_fn(a.height(), a.width(), |r, c| (1.0 - t) * a.get(r, c) + t * b.get(r, c))
}

#[test]
fn matches_reference_on_five_pairs() {
    let cases: Vec<(RealImage, RealImage, f64, f64)> = vec![
        (smooth(0), blend(&smooth(0), &hashed(1), 0.1), 28.918437008579726, 0.9529762780627627),
        (smooth(1), blend(&smooth(1), &hashed(2), 0.3), 19.409268079922136, 0.5660512327030691),
        (hashed(3), hashed(4), 7.634301262642903, 0.03863793373011408),
        (smooth(2), smooth(3), 18.76179743710832, 0.7818761624652548),
        (hashed(5), blend(&hashed(5), &smooth(4), 0.5), 14.882936172767444, 0.7791726817683147),
    ];
    for (i, (a, b, want_psnr, want_ssim)) in cases.iter().enumerate() {
        let got_psnr = psnr(a, b).unwrap();
        let got_ssim = ssim(a, b).unwrap();
        assert!((got_psnr - want_psnr).abs() < 1e-6, "pair {i}: psnr {got_psnr} vs {want_psnr}");
        assert!((got_ssim - want_ssim).abs() < 1e-6, "pair {i}: ssim {got_ssim} vs {want_ssim}");
    }
}
