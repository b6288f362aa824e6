//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails. Criteria run one after another so the runtime
//! budgets are measured without contention.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use phaseforge::appendixcheck::{deviation_sweep, hann_window, loglog_slope, mixed_signal, window_response};
use phaseforge::denoise::{degrade_phase_field, denoise_phase_field, denoise_subtree, NoisyPhaseObservation};
use phaseforge::dtcwt::{dtcwt_forward, dtcwt_inverse, Dtcwt};
use phaseforge::graph::{max_frequency_sweep, ChildMap, Selection};
use phaseforge::hqs::{hqs_restore, z_update, DegradationOperator, HqsSchedule};
use phaseforge::model::{
    average_congruency, congruency_of, cross_validate, em_fit, find_elbow, training_samples, EmConfig, PhaseGmm,
    SampleConfig, SampleSet,
};
use phaseforge::numerics::io::save_image;
use phaseforge::numerics::{ssim, wrapped_diff, RealImage};
use phaseforge::retrieval::{evaluate_pair, hio_run, lphio_run, RetrievalConfig, RetrievalParams};
use phaseforge::rng;
use phaseforge::synth::{structured, texture_corpus};
use rand::Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn emit(id: usize, name: &str, o: &Outcome, took: Duration) {
    // bypasses the test harness capture so the lines land in the log
    let mut out = std::io::stdout().lock();
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "[{verdict}] criterion {id:>2} {name}: {} ({:.1}s)", o.detail, took.as_secs_f64());
    let _ = out.flush();
}

fn random_image(h: usize, w: usize, seed: u64) -> RealImage {
    let mut g = rng::seeded(seed);
    RealImage::from_fn(h, w, |_, _| g.random::<f64>())
}

fn random_mixture(k: usize, dim: usize, seed: u64) -> PhaseGmm {
    let mut g = rng::seeded(seed);
    let mut weights: Vec<f64> = (0..k).map(|_| g.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let means = (0..k).map(|_| (0..dim).map(|_| g.random_range(-3.0..3.0)).collect()).collect();
    let vars = (0..k).map(|_| (0..dim).map(|_| g.random_range(0.05..2.0)).collect()).collect();
    PhaseGmm::new(weights, means, vars).unwrap()
}

/// Desk-scale texture model shared by several criteria.
fn texture_model() -> PhaseGmm {
    let train: Vec<RealImage> = texture_corpus(64, 48, 1).into_iter().map(|t| t.1).collect();
    let cfg = SampleConfig { selection: Selection::Fraction(0.2), ..SampleConfig::default() };
    let samples = training_samples(&train, &cfg).unwrap();
    em_fit(&samples, 10, &EmConfig { seed: 1, ..EmConfig::default() }).unwrap().model
}

fn c1_round_trip() -> Outcome {
    let start = Instant::now();
    let combos = [(64, 3), (64, 4), (128, 3), (128, 4), (256, 3), (256, 4)];
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let (n, levels) = combos[i % combos.len()];
        let x = random_image(n, n, 1000 + i as u64);
        let y = dtcwt_inverse(&dtcwt_forward(&x, levels).unwrap()).unwrap();
        worst = worst.max(x.max_abs_diff(&y));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-9 && secs < 10.0, format!("max error {worst:.2e} over 20 images in {secs:.2}s (< 1e-9, < 10s)"))
}

fn c2_em_monotone() -> Outcome {
    let truth = random_mixture(6, 10, 21);
    let mut g = rng::seeded(22);
    let rows: Vec<Vec<f64>> = (0..10_000)
        .map(|_| {
            let u: f64 = g.random();
            let mut acc = 0.0;
            let k = truth.weights.iter().position(|w| {
                acc += w;
                u < acc
            });
            let k = k.unwrap_or(truth.k() - 1);
            (0..10)
                .map(|d| Normal::new(truth.means[k][d], truth.variances[k][d].sqrt()).unwrap().sample(&mut g))
                .collect()
        })
        .collect();
    let samples = SampleSet::from_rows(10, &rows).unwrap();
    let mut worst_drop: f64 = 0.0;
    let mut parts = Vec::new();
    for k in [1, 5, 10] {
        let fit = em_fit(&samples, k, &EmConfig { seed: 5, force: true, ..EmConfig::default() }).unwrap();
        let drop = fit.trace.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
        worst_drop = worst_drop.max(drop);
        parts.push(format!("K={k}: {} iters", fit.iterations));
    }
    outcome(worst_drop <= 1e-9, format!("largest decrease {worst_drop:.2e} (<= 1e-9); {}", parts.join(", ")))
}

fn c3_limit_laws() -> Outcome {
    let mut g = rng::seeded(31);
    let (mut exact_zero, mut prior_err, mut mmse_err) = (true, 0.0f64, 0.0f64);
    for i in 0..100 {
        let model = random_mixture(1 + i % 5, 10, 300 + i as u64);
        let theta: Vec<f64> = (0..10).map(|_| g.random_range(-PI..PI)).collect();
        let est0 = denoise_subtree(&model, &NoisyPhaseObservation::full(theta.clone(), 0.0)).unwrap();
        exact_zero &= est0 == theta;
        let big = denoise_subtree(&model, &NoisyPhaseObservation::full(theta.clone(), 1e8)).unwrap();
        prior_err = prior_err.max(big.iter().zip(model.prior_mean()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

        let single = random_mixture(1, 10, 700 + i as u64);
        let s2: f64 = g.random_range(0.01..3.0);
        let est = denoise_subtree(&single, &NoisyPhaseObservation::full(theta.clone(), s2)).unwrap();
        for d in 0..10 {
            let (mu, v) = (single.means[0][d], single.variances[0][d]);
            let closed = (v * theta[d] + s2 * mu) / (v + s2);
            mmse_err = mmse_err.max((est[d] - closed).abs());
        }
    }
    outcome(
        exact_zero && prior_err < 1e-4 && mmse_err < 1e-10,
        format!("sigma2=0 exact: {exact_zero}; sigma2=1e8 error {prior_err:.2e} (< 1e-4); K=1 error {mmse_err:.2e} (< 1e-10)"),
    )
}

fn gauss(x: f64, m: f64, v: f64) -> f64 {
    (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

/// E{eta | theta} for the first two coordinates by grid quadrature over
/// +-10 standard deviations.
fn quadrature_mean(model: &PhaseGmm, theta: [f64; 2], s2: f64) -> [f64; 2] {
    const GRID: usize = 1201;
    let sd = model
        .variances
        .iter()
        .flat_map(|v| v[..2].iter())
        .fold(s2, |a, &b| a.max(b))
        .sqrt();
    let axis = |d: usize| -> Vec<f64> {
        let lo = model.means.iter().map(|m| m[d]).fold(theta[d], f64::min) - 10.0 * sd;
        let hi = model.means.iter().map(|m| m[d]).fold(theta[d], f64::max) + 10.0 * sd;
        (0..GRID).map(|i| lo + (hi - lo) * i as f64 / (GRID - 1) as f64).collect()
    };
    let (xs, ys) = (axis(0), axis(1));
    let (mut z, mut mx, mut my) = (0.0, 0.0, 0.0);
    for &x in &xs {
        for &y in &ys {
            let prior: f64 = (0..model.k())
                .map(|k| {
                    model.weights[k]
                        * gauss(x, model.means[k][0], model.variances[k][0])
                        * gauss(y, model.means[k][1], model.variances[k][1])
                })
                .sum();
            let p = prior * gauss(theta[0], x, s2) * gauss(theta[1], y, s2);
            z += p;
            mx += p * x;
            my += p * y;
        }
    }
    [mx / z, my / z]
}

fn c4_quadrature() -> Outcome {
    let mut g = rng::seeded(404);
    let mut worst: f64 = 0.0;
    let mut untouched = true;
    for _ in 0..50 {
        let w0: f64 = g.random_range(0.2..0.8);
        let means: Vec<Vec<f64>> = (0..2).map(|_| (0..10).map(|_| g.random_range(-2.5..2.5)).collect()).collect();
        let vars: Vec<Vec<f64>> = (0..2).map(|_| (0..10).map(|_| g.random_range(0.1..1.5)).collect()).collect();
        let model = PhaseGmm::new(vec![w0, 1.0 - w0], means, vars).unwrap();
        let s2: f64 = g.random_range(0.1..1.0);
        let k = usize::from(g.random::<f64>() >= w0);
        let mut theta = vec![0.0; 10];
        for d in 0..2 {
            let eta = Normal::new(model.means[k][d], model.variances[k][d].sqrt()).unwrap().sample(&mut g);
            theta[d] = eta + Normal::new(0.0, s2.sqrt()).unwrap().sample(&mut g);
        }
        let mut present = vec![false; 10];
        present[0] = true;
        present[1] = true;
        let est = denoise_subtree(&model, &NoisyPhaseObservation { theta: theta.clone(), sigma2: s2, present }).unwrap();
        let q = quadrature_mean(&model, [theta[0], theta[1]], s2);
        worst = worst.max((est[0] - q[0]).abs()).max((est[1] - q[1]).abs());
        untouched &= est[2..] == theta[2..];
    }
    outcome(
        worst < 1e-3 && untouched,
        format!("max deviation {worst:.2e} over 50 mixtures (< 1e-3); absent slots unchanged: {untouched}"),
    )
}

fn c5_denoising(model: &PhaseGmm, train_time: Duration) -> Outcome {
    let start = Instant::now();
    let mut test: Vec<RealImage> = texture_corpus(64, 8, 77).into_iter().map(|t| t.1).collect();
    test.push(structured(64, 64, 5));
    test.push(structured(64, 64, 6));
    let t = Dtcwt::default();
    let mut wins = 0;
    for (i, img) in test.iter().enumerate() {
        let p = t.forward(img, 4).unwrap();
        let (noisy, field) = degrade_phase_field(&p, 2.0, &mut rng::substream(3, "noise", i as u64)).unwrap();
        let deg = t.inverse(&noisy).unwrap();
        let rec = t.inverse(&denoise_phase_field(&noisy, &field, model, 4.0, ChildMap::Dyadic).unwrap()).unwrap();
        wins += usize::from(ssim(img, &rec).unwrap() > ssim(img, &deg).unwrap());
    }
    let secs = (start.elapsed() + train_time).as_secs_f64();
    outcome(
        wins >= 8 && secs < 120.0,
        format!("SSIM improved on {wins}/10 images (>= 8) in {secs:.1}s including training (< 120s)"),
    )
}

fn c6_degeneracy(model: &PhaseGmm) -> Outcome {
    let truth = structured(32, 32, 2);
    let params = RetrievalParams { iterations: 120, n_est: 121, seed: 8, ..RetrievalParams::default() };
    let cfg = RetrievalConfig::for_image(&truth, params).unwrap();
    let hio = hio_run(&cfg).unwrap();
    let lp = lphio_run(&cfg, model).unwrap();
    let same = hio.errors.iter().zip(&lp.errors).all(|(a, b)| a.to_bits() == b.to_bits())
        && hio.errors.len() == lp.errors.len()
        && hio.image == lp.image;
    outcome(same, format!("N_est = T + 1 traces bit-identical: {same}"))
}

fn c7_retrieval(model: &PhaseGmm) -> Outcome {
    let start = Instant::now();
    let mut imgs: Vec<RealImage> = texture_corpus(64, 3, 77).into_iter().map(|t| t.1).collect();
    imgs.push(structured(64, 64, 5));
    imgs.push(structured(64, 64, 6));
    let params = RetrievalParams { iterations: 300, n_est: 25, seed: 11, ..RetrievalParams::default() };
    let ev = evaluate_pair(&imgs, &params, 3, model).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ev.mean_d_f < 0.0 && ev.mean_d_p > 0.0 && secs < 900.0,
        format!(
            "mean d_F {:.3} (< 0), mean d_P {:.3} dB (> 0) over {} runs in {secs:.0}s (< 900s)",
            ev.mean_d_f,
            ev.mean_d_p,
            ev.pairs.len()
        ),
    )
}

fn c8_elbow() -> Outcome {
    let mut exact = 0;
    let mut total = 0;
    for (lo, hi, bp, s1, s2) in [(1, 12, 5, 2.0, 0.1), (2, 15, 7, 0.8, 0.05), (1, 10, 3, 5.0, -0.5), (3, 20, 12, 1.0, 0.2)] {
        let ks: Vec<usize> = (lo..=hi).collect();
        let ys: Vec<f64> = ks
            .iter()
            .map(|&k| {
                let d = k as f64 - bp as f64;
                if k <= bp { s1 * d } else { s2 * d }
            })
            .collect();
        total += 1;
        exact += usize::from(find_elbow(&ks, &ys).unwrap() == bp);
    }
    let train: Vec<RealImage> = texture_corpus(64, 24, 1).into_iter().map(|t| t.1).collect();
    let cfg = SampleConfig { selection: Selection::Fraction(0.2), ..SampleConfig::default() };
    let samples = training_samples(&train, &cfg).unwrap();
    let ks: Vec<usize> = (1..=12).collect();
    let em = EmConfig { seed: 1, force: true, max_iters: 100, ..EmConfig::default() };
    let scores = cross_validate(&samples, &ks, 10, &em).unwrap();
    let means: Vec<f64> = scores.iter().map(|s| s.mean).collect();
    let k_star = find_elbow(&ks, &means).unwrap();
    outcome(
        exact == total && (5..=10).contains(&k_star),
        format!("breakpoints recovered {exact}/{total}; texture corpus ({} samples) K* = {k_star} (in [5, 10])", samples.len()),
    )
}

fn c9_strong_weak() -> Outcome {
    let fractions: Vec<f64> = (7..=20).map(|p| p as f64 / 100.0).collect();
    let corpus = texture_corpus(128, 12, 0);
    let t = Dtcwt::default();
    let mut strong = vec![0.0; fractions.len()];
    let mut weak = vec![0.0; fractions.len()];
    for (_, img) in &corpus {
        let p = t.forward(img, 4).unwrap();
        for row in max_frequency_sweep(&p, &fractions).unwrap() {
            let i = fractions.iter().position(|&f| f == row.fraction).unwrap();
            strong[i] += row.strong;
            weak[i] += row.weak;
        }
    }
    let wins = strong.iter().zip(&weak).filter(|(s, w)| s > w).count();
    outcome(
        2 * wins > fractions.len(),
        format!("strong > weak mean maximal frequency at {wins}/{} thresholds (majority)", fractions.len()),
    )
}

fn c10_appendix() -> Outcome {
    let n = 256;
    let etas: Vec<f64> = (0..9).map(|i| (0.025f64.ln() + (0.4f64 / 0.025).ln() * i as f64 / 8.0).exp()).collect();
    let window = hann_window(n / 8);
    let points = deviation_sweep(&mixed_signal(n), 10, &etas, &window, n / 16).unwrap();
    let slope = loglog_slope(&points).unwrap();
    let mut spread: f64 = 0.0;
    for f0 in [3, 10, 40] {
        let base: Vec<f64> = window_response(&window, n, 0, f0).iter().map(|z| z.norm()).collect();
        for t0 in 1..n {
            let other = window_response(&window, n, t0, f0);
            spread = spread.max(base.iter().zip(&other).map(|(a, z)| (a - z.norm()).abs()).fold(0.0, f64::max));
        }
    }
    outcome(
        (slope - 2.0).abs() <= 0.2 && spread < 1e-9,
        format!("log-log slope {slope:.3} (2.0 +- 0.2); |z| spread over t0 {spread:.2e} (< 1e-9)"),
    )
}

fn c11_hqs(model: &PhaseGmm) -> Outcome {
    let t = Dtcwt::default();
    let img = structured(64, 64, 3);
    let p = t.forward(&img, 4).unwrap();
    let a_w = phaseforge::denoise::phase_field(&p);
    let (z_hi, _) = z_update(&a_w, &p, model, 1e9, ChildMap::Dyadic, false).unwrap();
    let (z_lo, ks) = z_update(&a_w, &p, model, 1e-9, ChildMap::Dyadic, false).unwrap();
    let (mut to_a, mut to_mu) = (0.0f64, 0.0f64);
    for l in 0..a_w.len() {
        for o in 0..a_w[l].len() {
            for i in 0..a_w[l][o].len() {
                let a = a_w[l][o].data()[i];
                to_a = to_a.max(wrapped_diff(z_hi[l][o].data()[i], a).abs());
                let mu = model.means[ks[l][o][i]][0];
                to_mu = to_mu.max((z_lo[l][o].data()[i] - mu).abs());
            }
        }
    }

    let noise = 0.001;
    let mut fixtures: Vec<RealImage> = texture_corpus(64, 4, 77).into_iter().map(|t| t.1).collect();
    fixtures.push(structured(64, 64, 5));
    let h = DegradationOperator::gaussian_blur(5, 1.0).unwrap();
    let schedule = HqsSchedule { alphas: vec![1.0, 4.0, 16.0], ..HqsSchedule::default() }.with_noise_sigma(noise);
    let mut rises = 0;
    let mut stages = 0;
    for (i, x) in fixtures.iter().enumerate() {
        let normal = Normal::new(0.0, noise).unwrap();
        let mut g = rng::substream(9, "hqs-noise", i as u64);
        let hx = h.apply(x);
        let y = RealImage::from_fn(64, 64, |r, c| hx.get(r, c) + normal.sample(&mut g));
        let out = hqs_restore(&y, &h, model, &schedule).unwrap();
        for stage in out.records.chunk_by(|a, b| a.stage == b.stage) {
            stages += 1;
            rises += stage.windows(2).filter(|p| p[1].objective > p[0].objective + 1e-9).count();
        }
    }
    outcome(
        to_a < 1e-6 && to_mu < 1e-6 && rises == 0,
        format!(
            "alpha=1e9 |z - a_w| {to_a:.2e}, alpha=1e-9 |z - mu| {to_mu:.2e} (< 1e-6); objective rises {rises} over {stages} stages"
        ),
    )
}

fn c12_congruency(shared: &PhaseGmm) -> Outcome {
    let train: Vec<RealImage> = texture_corpus(64, 12, 2).into_iter().map(|t| t.1).collect();
    let cfg = SampleConfig { selection: Selection::Fraction(0.2), ..SampleConfig::default() };
    let samples = training_samples(&train, &cfg).unwrap();
    let mut models = vec![shared.clone()];
    for k in [2, 5, 15] {
        let em = EmConfig { seed: k as u64, force: true, max_iters: 60, ..EmConfig::default() };
        models.push(em_fit(&samples, k, &em).unwrap().model);
    }
    let mut in_range = true;
    let mut count = 0;
    for m in &models {
        for k in 0..m.k() {
            let ag = average_congruency(m, k).unwrap();
            in_range &= (0.0..=1.0).contains(&ag);
            count += 1;
        }
    }
    // scale-normalized phases and their hand-computed congruency
    let cases = [
        ([0.4, 0.4, 0.4], 1.0),
        ([0.0, PI / 2.0, PI], 1.0 / 3.0),
        ([0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0], 0.0),
        ([0.0, 0.0, PI], 1.0 / 6.0),
        ([-PI, 0.0, PI], 1.0 / 3.0),
    ];
    let mut worst: f64 = 0.0;
    for (eta, expected) in cases {
        worst = worst.max((congruency_of(eta) - expected).abs());
        // the same phases routed through a model mean: parent, centre, children
        let mut mean = vec![0.0; 10];
        mean[9] = eta[0] / 2.0;
        mean[0] = eta[1];
        mean[5..9].iter_mut().for_each(|v| *v = 2.0 * eta[2]);
        let m = PhaseGmm::new(vec![1.0], vec![mean], vec![vec![1.0; 10]]).unwrap();
        worst = worst.max((average_congruency(&m, 0).unwrap() - expected).abs());
    }
    outcome(
        in_range && worst < 1e-12,
        format!("AG in [0, 1] for {count} trained components: {in_range}; hand cases max error {worst:.1e} (< 1e-12)"),
    )
}

fn phaseforge(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_phaseforge"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn phaseforge")
}

fn same_tree(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let mut other: Vec<_> = fs::read_dir(b).unwrap().map(|e| e.unwrap().file_name()).collect();
    other.sort();
    if names != other {
        return Err(format!("file sets differ: {names:?} vs {other:?}"));
    }
    for n in &names {
        if fs::read(a.join(n)).unwrap() != fs::read(b.join(n)).unwrap() {
            return Err(format!("{} differs", n.to_string_lossy()));
        }
    }
    Ok(names.len())
}

fn c13_reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let corpus = dir.join("corpus");
    fs::create_dir(&corpus).unwrap();
    for (i, (_, img)) in texture_corpus(80, 3, 5).iter().enumerate() {
        save_image(&corpus.join(format!("t{i}.pgm")), img).unwrap();
    }
    let test = dir.join("test.pgm");
    save_image(&test, &structured(64, 64, 9)).unwrap();
    fs::write(dir.join("kernel.txt"), "1 2 1\n2 4 2\n1 2 1\n").unwrap();
    let d = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let model = d("train/model.json");
    let (test, kernel, corpus) = (d("test.pgm"), d("kernel.txt"), d("corpus"));

    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("train", vec!["train", "--synthetic", "12", "--size", "64", "--fraction", "0.2", "--k", "4", "--max-iters", "40"]),
        ("train-cv", vec!["train", "--synthetic", "12", "--size", "64", "--fraction", "0.2", "--k-range", "1..4", "--folds", "3", "--max-iters", "20"]),
        ("train-corpus", vec!["train", "--corpus", &corpus, "--size", "64", "--fraction", "0.2", "--k", "2", "--max-iters", "20", "--force"]),
        ("denoise", vec!["denoise", "--model", &model, "--image", &test, "--sigma", "1.5"]),
        ("retrieve", vec!["retrieve", "--model", &model, "--image", &test, "--iterations", "30", "--n-est", "10", "--inits", "2"]),
        ("analyze", vec!["analyze", "--image", &test, "--levels", "3", "--model", &model]),
        ("restore", vec!["restore", "--model", &model, "--image", &test, "--kernel", &kernel, "--simulate", "--alphas", "1,4", "--levels", "3", "--inner-iters", "5", "--alternations", "2"]),
        ("appendix-check", vec!["appendix-check"]),
    ];
    let mut failures = Vec::new();
    let mut files = 0;
    for (name, args) in &runs {
        let first = d(name);
        let second = d(&format!("{name}-rerun"));
        let mut full = vec!["--seed", "7", "--out", &first];
        full.extend(args.iter().copied());
        let o = phaseforge(&full);
        if !o.status.success() {
            failures.push(format!("{name}: {}", String::from_utf8_lossy(&o.stderr).trim()));
            continue;
        }
        let o = phaseforge(&["--config", &format!("{first}/run.json"), "--out", &second]);
        if !o.status.success() {
            failures.push(format!("{name} rerun: {}", String::from_utf8_lossy(&o.stderr).trim()));
            continue;
        }
        match same_tree(Path::new(&first), Path::new(&second)) {
            Ok(n) => files += n,
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{} runs rerun from run.json, {files} files byte-identical", runs.len())
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        emit(id, name, &o, start.elapsed());
        results.push((id, o.pass));
    };
    run(1, "DTCWT round trip", &mut c1_round_trip);
    run(2, "EM monotonicity", &mut c2_em_monotone);
    run(3, "denoiser limit laws", &mut c3_limit_laws);
    run(4, "denoiser quadrature oracle", &mut c4_quadrature);

    let start = Instant::now();
    let model = texture_model();
    let train_time = start.elapsed();
    run(5, "phase-denoising experiment", &mut || c5_denoising(&model, train_time));
    run(6, "LPHIO/HIO degeneracy", &mut || c6_degeneracy(&model));
    run(7, "retrieval benchmark", &mut || c7_retrieval(&model));
    run(8, "elbow selection", &mut c8_elbow);
    run(9, "strong/weak statistics", &mut c9_strong_weak);
    run(10, "STFT perturbation law", &mut c10_appendix);
    run(11, "HQS limits and objective", &mut || c11_hqs(&model));
    run(12, "average congruency", &mut || c12_congruency(&model));
    run(13, "CLI reproducibility", &mut c13_reproducibility);

    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
