//! End-to-end checks of the command-line contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phaseforge::numerics::io::save_image;
use phaseforge::synth::{structured, texture_corpus};

fn phaseforge(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaseforge"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("PHASEFORGE_DATA");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn phaseforge")
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Trains a tiny model on the PGMs in `dir/corpus` and returns its path.
fn tiny_model(dir: &Path) -> String {
    let corpus = dir.join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    for (i, (_, img)) in texture_corpus(64, 3, 4).iter().enumerate() {
        save_image(&corpus.join(format!("t{i}.pgm")), img).unwrap();
    }
    let out = dir.join("model");
    let o = phaseforge(
        &["--out", &s(&out), "train", "--corpus", &s(&corpus), "--size", "64", "--fraction", "0.2", "--k", "2", "--max-iters", "20", "--force"],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    s(&out.join("model.json"))
}

#[test]
fn training_image_is_refused_with_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tiny_model(tmp.path());
    let train_img = s(&tmp.path().join("corpus/t0.pgm"));
    let o = phaseforge(&["--out", &s(&tmp.path().join("d")), "denoise", "--model", &model, "--image", &train_img, "--sigma", "1"], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("used to train"));
}

#[test]
fn zero_sigma_reports_infinite_psnr() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tiny_model(tmp.path());
    let img = tmp.path().join("x.pgm");
    save_image(&img, &structured(64, 64, 1)).unwrap();
    let out = tmp.path().join("d");
    let o = phaseforge(&["--out", &s(&out), "denoise", "--model", &model, "--image", &s(&img), "--sigma", "0"], &[]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "image,psnr_deg,ssim_deg,psnr_rec,ssim_rec");
    assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(3), Some("inf"));
}

#[test]
fn retrieve_writes_two_traces_per_pair_and_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tiny_model(tmp.path());
    let (a, b) = (tmp.path().join("a.pgm"), tmp.path().join("b.pgm"));
    save_image(&a, &structured(32, 32, 1)).unwrap();
    save_image(&b, &structured(32, 32, 2)).unwrap();
    let out = tmp.path().join("r");
    let o = phaseforge(
        &["--out", &s(&out), "retrieve", "--model", &model, "--image", &s(&a), &s(&b), "--inits", "2", "--iterations", "20", "--n-est", "5"],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traces = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("trace_")).count();
    assert_eq!(traces, 8);
    let pairs = fs::read_to_string(out.join("pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 5);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "measure,mean,std");
    assert!(rows[1].starts_with("d_f,") && rows[2].starts_with("d_p,"));
}

#[test]
fn identity_restore_of_a_clean_image_stays_close() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tiny_model(tmp.path());
    let img = tmp.path().join("x.pgm");
    save_image(&img, &structured(64, 64, 3)).unwrap();
    let out = tmp.path().join("h");
    let o = phaseforge(&["--out", &s(&out), "restore", "--model", &model, "--image", &s(&img), "--alphas", "1,4", "--levels", "3"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = phaseforge::numerics::io::load_image(&img).unwrap();
    let r = phaseforge::numerics::io::load_image(&out.join("restored.png")).unwrap();
    assert!(phaseforge::numerics::psnr(&x, &r).unwrap() > 30.0);
}

#[test]
fn bad_kernel_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tiny_model(tmp.path());
    let img = tmp.path().join("x.pgm");
    save_image(&img, &structured(64, 64, 3)).unwrap();
    let kernel = tmp.path().join("k.txt");
    fs::write(&kernel, "1 2\n3\n").unwrap();
    let o = phaseforge(&["--out", &s(&tmp.path().join("h")), "restore", "--model", &model, "--image", &s(&img), "--kernel", &s(&kernel)], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn undersized_training_set_exits_2_with_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let o = phaseforge(&["--out", &s(&tmp.path().join("t")), "train", "--synthetic", "2", "--size", "64", "--fraction", "0.2", "--k", "10"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r_params"));
}

#[test]
fn corpus_defaults_to_data_env() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("data");
    fs::create_dir_all(&corpus).unwrap();
    for (i, (_, img)) in texture_corpus(64, 2, 8).iter().enumerate() {
        save_image(&corpus.join(format!("{i}.png")), img).unwrap();
    }
    let out = tmp.path().join("t");
    let args = ["--out", &s(&out), "train", "--size", "64", "--fraction", "0.2", "--k", "2", "--max-iters", "5", "--force"];
    let o = phaseforge(&args, &[("PHASEFORGE_DATA", &corpus)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = fs::read_to_string(out.join("run.json")).unwrap();
    assert!(run.contains("\"0.png\"") && run.contains("\"1.png\""));
    assert_eq!(phaseforge(&args, &[]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(phaseforge(&["--out", &s(tmp.path())], &[]).status.code(), Some(2));
    assert_eq!(phaseforge(&["appendix-check", "--n", "100"], &[]).status.code(), Some(2));
    let run = tmp.path().join("run.json");
    fs::write(&run, "{\"format\": \"other\"}").unwrap();
    assert_eq!(phaseforge(&["--config", &s(&run)], &[]).status.code(), Some(2));
}

#[test]
fn appendix_check_reports_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let o = phaseforge(&["--out", &s(tmp.path()), "appendix-check"], &[]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("slope.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",true"));
    assert_eq!(fs::read_to_string(tmp.path().join("sweep.csv")).unwrap().lines().count(), 10);
}
