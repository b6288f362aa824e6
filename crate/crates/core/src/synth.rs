//! Procedural test images: a piecewise-smooth "scene" with sharp edges and a
//! family of seeded textures. Everything is deterministic in the seed and
//! normalized to [0, 1].

use std::f64::consts::PI;

use rand::Rng;

use crate::numerics::io::normalize_range;
use crate::numerics::RealImage;
use crate::rng;

/// Names accepted by [`texture`].
pub const TEXTURES: [&str; 12] = [
    "stripes", "checker", "rings", "bricks", "weave", "dots", "cells", "marble", "waves",
    "herringbone", "blobs", "grid",
];

/// Smooth random field: bilinear interpolation of a lattice of uniform
/// values with spacing `cell` pixels.
pub fn value_noise(h: usize, w: usize, cell: f64, seed: u64) -> RealImage {
    let mut g = rng::stream(seed, "value-noise");
    let gh = (h as f64 / cell).ceil() as usize + 2;
    let gw = (w as f64 / cell).ceil() as usize + 2;
    let lattice: Vec<f64> = (0..gh * gw).map(|_| g.random::<f64>()).collect();
    RealImage::from_fn(h, w, |r, c| {
        let (y, x) = (r as f64 / cell, c as f64 / cell);
        let (y0, x0) = (y.floor() as usize, x.floor() as usize);
        let (fy, fx) = (y - y0 as f64, x - x0 as f64);
        let (sy, sx) = (fy * fy * (3.0 - 2.0 * fy), fx * fx * (3.0 - 2.0 * fx));
        let v = |i: usize, j: usize| lattice[i * gw + j];
        let top = v(y0, x0) * (1.0 - sx) + v(y0, x0 + 1) * sx;
        let bot = v(y0 + 1, x0) * (1.0 - sx) + v(y0 + 1, x0 + 1) * sx;
        top * (1.0 - sy) + bot * sy
    })
}

/// Piecewise-smooth scene of overlapping discs, rectangles and bars over a
/// shaded background.
pub fn structured(h: usize, w: usize, seed: u64) -> RealImage {
    let mut g = rng::stream(seed, "structured");
    let (hf, wf) = (h as f64, w as f64);
    let gy = g.random_range(-0.3..0.3);
    let gx = g.random_range(-0.3..0.3);
    let mut img = RealImage::from_fn(h, w, |r, c| 0.5 + gy * (r as f64 / hf - 0.5) + gx * (c as f64 / wf - 0.5));
    let shapes = 6 + (seed % 4) as usize;
    for k in 0..shapes {
        let value = g.random_range(0.0..1.0);
        let cy = g.random_range(0.1..0.9) * hf;
        let cx = g.random_range(0.1..0.9) * wf;
        let size = g.random_range(0.08..0.3) * hf.min(wf);
        let theta = g.random_range(0.0..PI);
        let (st, ct) = theta.sin_cos();
        for r in 0..h {
            for c in 0..w {
                let (dy, dx) = (r as f64 - cy, c as f64 - cx);
                let inside = match k % 3 {
                    0 => dy * dy + dx * dx < size * size,
                    1 => {
                        let u = ct * dx + st * dy;
                        let v = -st * dx + ct * dy;
                        u.abs() < size && v.abs() < 0.6 * size
                    }
                    _ => {
                        let u = ct * dx + st * dy;
                        let v = -st * dx + ct * dy;
                        u.abs() < 1.6 * size && v.abs() < 0.15 * size
                    }
                };
                if inside {
                    img.set(r, c, value);
                }
            }
        }
    }
    let grain = value_noise(h, w, 3.0, seed ^ 0x5eed);
    normalize_range(&RealImage::from_fn(h, w, |r, c| {
        img.get(r, c) + 0.04 * (grain.get(r, c) - 0.5)
    }))
}

/// Seeded texture of the given family. Unknown names return `None`.
pub fn texture(name: &str, n: usize, seed: u64) -> Option<RealImage> {
    let mut g = rng::stream(seed, name);
    let theta = g.random_range(0.0..PI);
    let (st, ct) = theta.sin_cos();
    let period = g.random_range(5.0..12.0);
    let phase = g.random_range(0.0..2.0 * PI);
    let noise = value_noise(n, n, g.random_range(4.0..10.0), seed.wrapping_add(17));
    let k = 2.0 * PI / period;
    let rot = |r: usize, c: usize| {
        let (y, x) = (r as f64, c as f64);
        (ct * x + st * y, -st * x + ct * y)
    };
    let img = match name {
        "stripes" => RealImage::from_fn(n, n, |r, c| {
            let (u, _) = rot(r, c);
            let s = (k * u + phase).sin();
            s + 0.3 * (3.0 * k * u).sin() + 0.4 * noise.get(r, c)
        }),
        "checker" => RealImage::from_fn(n, n, |r, c| {
            let (u, v) = rot(r, c);
            let s = (k * u + phase).sin() * (k * v).sin();
            s.signum() * s.abs().sqrt() + 0.3 * noise.get(r, c)
        }),
        "rings" => {
            let (cy, cx) = (g.random_range(0.0..n as f64), g.random_range(0.0..n as f64));
            RealImage::from_fn(n, n, |r, c| {
                let d = ((r as f64 - cy).powi(2) + (c as f64 - cx).powi(2)).sqrt();
                (k * d + 6.0 * noise.get(r, c) + phase).sin()
            })
        }
        "bricks" => {
            let bh = period.round().max(4.0) as usize;
            let bw = 2 * bh + 1;
            RealImage::from_fn(n, n, |r, c| {
                let row = r / bh;
                let shifted = c + (row % 2) * bw / 2;
                let mortar = r % bh == 0 || shifted % bw == 0;
                let tone = ((row * 7 + shifted / bw * 13) % 5) as f64 / 10.0;
                if mortar {
                    0.1
                } else {
                    0.5 + tone + 0.2 * noise.get(r, c)
                }
            })
        }
        "weave" => RealImage::from_fn(n, n, |r, c| {
            let (u, v) = rot(r, c);
            let cell = ((u / period).floor() + (v / period).floor()) as i64;
            let thread = if cell.rem_euclid(2) == 0 { (k * 2.0 * v).sin() } else { (k * 2.0 * u).sin() };
            thread.abs() + 0.2 * noise.get(r, c)
        }),
        "dots" => RealImage::from_fn(n, n, |r, c| {
            let (u, v) = rot(r, c);
            let fu = (u / period).rem_euclid(1.0) - 0.5;
            let fv = (v / period).rem_euclid(1.0) - 0.5;
            (-(fu * fu + fv * fv) * 18.0).exp() + 0.2 * noise.get(r, c)
        }),
        "cells" => {
            let count = ((n * n) as f64 / (period * period * 4.0)).max(4.0) as usize;
            let seeds: Vec<(f64, f64)> = (0..count)
                .map(|_| (g.random_range(0.0..n as f64), g.random_range(0.0..n as f64)))
                .collect();
            RealImage::from_fn(n, n, |r, c| {
                let (mut d1, mut d2) = (f64::INFINITY, f64::INFINITY);
                for &(y, x) in &seeds {
                    let d = ((r as f64 - y).powi(2) + (c as f64 - x).powi(2)).sqrt();
                    if d < d1 {
                        d2 = d1;
                        d1 = d;
                    } else if d < d2 {
                        d2 = d;
                    }
                }
                (d2 - d1).min(period) / period
            })
        }
        "marble" => RealImage::from_fn(n, n, |r, c| {
            let (u, _) = rot(r, c);
            (k * u + 8.0 * noise.get(r, c) + phase).sin()
        }),
        "waves" => {
            let comps: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        g.random_range(0.0..PI),
                        2.0 * PI / g.random_range(4.0..16.0),
                        g.random_range(0.0..2.0 * PI),
                    )
                })
                .collect();
            RealImage::from_fn(n, n, |r, c| {
                comps
                    .iter()
                    .map(|&(a, kk, p)| (kk * (a.cos() * c as f64 + a.sin() * r as f64) + p).sin())
                    .sum::<f64>()
            })
        }
        "herringbone" => RealImage::from_fn(n, n, |r, c| {
            let (u, v) = rot(r, c);
            let band = (v / (2.0 * period)).floor() as i64;
            let dir = if band.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (k * (u + dir * v) + phase).sin() + 0.3 * noise.get(r, c)
        }),
        "blobs" => {
            let fine = value_noise(n, n, period / 2.0, seed.wrapping_add(99));
            RealImage::from_fn(n, n, |r, c| noise.get(r, c) + 0.5 * fine.get(r, c))
        }
        "grid" => RealImage::from_fn(n, n, |r, c| {
            let (u, v) = rot(r, c);
            let lu = (u / period).rem_euclid(1.0);
            let lv = (v / period).rem_euclid(1.0);
            let line = (lu < 0.2) as u8 as f64 + (lv < 0.2) as u8 as f64;
            line + 0.5 * noise.get(r, c)
        }),
        _ => return None,
    };
    Some(normalize_range(&img))
}

/// `count` textures of side `n`, cycling through every family with
/// distinct seeds derived from `seed`.
pub fn texture_corpus(n: usize, count: usize, seed: u64) -> Vec<(String, RealImage)> {
    (0..count)
        .map(|i| {
            let name = TEXTURES[i % TEXTURES.len()];
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            (format!("{name}-{i:03}"), texture(name, n, s).expect("known texture"))
        })
        .collect()
}
