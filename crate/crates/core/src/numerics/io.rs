//! 8-bit grayscale image I/O: binary PGM (P5) and PNG.
//!
//! Samples are normalized to [0, 1] by dividing by the format's maximum value.
//! Colour PNGs are reduced to luminance with BT.601 weights.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::image::RealImage;
use crate::error::{Error, Result};

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn header_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return format_err("truncated PGM header");
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_usize(tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Format(format!("bad PGM header field '{tok}'")))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<RealImage> {
    let mut pos = 0;
    if header_token(bytes, &mut pos)? != "P5" {
        return format_err("not a binary PGM (P5)");
    }
    let width = parse_usize(&header_token(bytes, &mut pos)?)?;
    let height = parse_usize(&header_token(bytes, &mut pos)?)?;
    let maxval = parse_usize(&header_token(bytes, &mut pos)?)?;
    if maxval == 0 || maxval > 65535 {
        return format_err(format!("PGM maxval {maxval} out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let bps = if maxval < 256 { 1 } else { 2 };
    let need = width * height * bps;
    if bytes.len() < pos + need {
        return format_err("truncated PGM raster");
    }
    let raster = &bytes[pos..pos + need];
    let scale = 1.0 / maxval as f64;
    let data = if bps == 1 {
        raster.iter().map(|&b| f64::from(b) * scale).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|p| f64::from(u16::from_be_bytes([p[0], p[1]])) * scale)
            .collect()
    };
    RealImage::new(height, width, data)
}

/// 8-bit quantization of a [0, 1] image (values are clamped).
pub fn quantize(image: &RealImage) -> Vec<u8> {
    image
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

pub fn encode_pgm(image: &RealImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(quantize(image));
    out
}

fn luminance(r: u8, g: u8, b: u8) -> f64 {
    (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)) / 255.0
}

pub fn decode_png(bytes: &[u8]) -> Result<RealImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        image::DynamicImage::ImageLuma8(g) => g.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        image::DynamicImage::ImageLuma16(g) => {
            g.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect()
        }
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    RealImage::new(h, w, data)
}

pub fn encode_png(image: &RealImage) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(image.width() as u32, image.height() as u32, quantize(image))
        .ok_or_else(|| Error::Format("raster size mismatch".into()))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)?;
    Ok(out.into_inner())
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Loads a PGM or PNG (chosen by extension; anything but `.png` is read as PGM).
pub fn load_image(path: &Path) -> Result<RealImage> {
    let bytes = fs::read(path)?;
    if is_png(path) {
        decode_png(&bytes)
    } else {
        decode_pgm(&bytes)
    }
}

/// Writes `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        fs::create_dir_all(dir)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_image(path: &Path, image: &RealImage) -> Result<()> {
    let bytes = if is_png(path) {
        encode_png(image)?
    } else {
        encode_pgm(image)
    };
    write_atomic(path, &bytes)
}

/// Min-max normalizes `image` to [0, 1] (constant images map to 0).
pub fn normalize_range(image: &RealImage) -> RealImage {
    let lo = image.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = image.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span <= 0.0 {
        return RealImage::zeros(image.height(), image.width());
    }
    image.map(|v| (v - lo) / span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_quantized() {
        let img = RealImage::from_fn(5, 7, |r, c| ((r * 7 + c) * 6) as f64 / 255.0);
        let back = decode_pgm(&encode_pgm(&img)).unwrap();
        assert!(back.max_abs_diff(&img) < 1e-12);
    }

    #[test]
    fn pgm_header_comments() {
        let mut bytes = b"P5\n# comment\n2 1\n255\n".to_vec();
        bytes.extend([0u8, 255]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn pgm_rejects_ascii_and_truncation() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00").is_err());
    }

    #[test]
    fn png_round_trip_and_colour_luminance() {
        let img = RealImage::from_fn(3, 4, |r, c| ((r + c) * 20) as f64 / 255.0);
        let back = decode_png(&encode_png(&img).unwrap()).unwrap();
        assert!(back.max_abs_diff(&img) < 1e-12);

        let rgb = image::RgbImage::from_raw(1, 1, vec![255, 0, 0]).unwrap();
        let mut bytes = std::io::Cursor::new(Vec::new());
        rgb.write_to(&mut bytes, image::ImageFormat::Png).unwrap();
        let lum = decode_png(&bytes.into_inner()).unwrap();
        assert!((lum.get(0, 0) - 0.299).abs() < 1e-12);
    }

    #[test]
    fn atomic_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let img = RealImage::from_fn(4, 4, |r, c| ((r * 4 + c) * 10) as f64 / 255.0);
        for name in ["a.pgm", "b.png"] {
            let p = dir.path().join(name);
            save_image(&p, &img).unwrap();
            let back = load_image(&p).unwrap();
            assert!(back.max_abs_diff(&img) < 1e-12);
        }
    }
}
