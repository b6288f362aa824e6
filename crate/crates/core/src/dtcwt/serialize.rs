//! Binary pyramid container.
//!
//! Layout (little-endian): magic `DTCP`, version `u16`, levels `u16`,
//! original and padded dimensions (4 x `u32`), lowpass dimensions
//! (2 x `u32`), then per level and band its dimensions (2 x `u32`). The
//! header is followed by the lowpass samples (`f64`) and the band samples as
//! interleaved re/im `f64` pairs, level 1 first, bands in orientation order.

use num_complex::Complex64;

use super::{ComplexPyramid, DetailLevel, PyramidMeta, FILTER_SET_ID, ORIENTATIONS};
use crate::error::{Error, Result};
use crate::numerics::{ComplexImage, RealImage};

pub const PYRAMID_MAGIC: &[u8; 4] = b"DTCP";
pub const PYRAMID_VERSION: u16 = 1;

pub fn encode_pyramid(p: &ComplexPyramid) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(PYRAMID_MAGIC);
    out.extend_from_slice(&PYRAMID_VERSION.to_le_bytes());
    out.extend_from_slice(&(p.levels.len() as u16).to_le_bytes());
    for v in [
        p.meta.height,
        p.meta.width,
        p.meta.padded_height,
        p.meta.padded_width,
        p.lowpass.height(),
        p.lowpass.width(),
    ] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for lvl in &p.levels {
        for band in &lvl.bands {
            out.extend_from_slice(&(band.height() as u32).to_le_bytes());
            out.extend_from_slice(&(band.width() as u32).to_le_bytes());
        }
    }
    for v in p.lowpass.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for lvl in &p.levels {
        for band in &lvl.bands {
            for z in band.data() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("truncated pyramid container".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_pyramid(bytes: &[u8]) -> Result<ComplexPyramid> {
    let mut rd = Reader { bytes, pos: 0 };
    if rd.take(4)? != PYRAMID_MAGIC {
        return Err(Error::Format("bad pyramid magic".into()));
    }
    let version = rd.u16()?;
    if version != PYRAMID_VERSION {
        return Err(Error::Format(format!("unsupported pyramid version {version}")));
    }
    let levels = rd.u16()? as usize;
    let (height, width, padded_height, padded_width) = (rd.u32()?, rd.u32()?, rd.u32()?, rd.u32()?);
    let (lh, lw) = (rd.u32()?, rd.u32()?);
    let mut dims = Vec::with_capacity(levels * ORIENTATIONS);
    for _ in 0..levels * ORIENTATIONS {
        dims.push((rd.u32()?, rd.u32()?));
    }
    let mut low = Vec::with_capacity(lh * lw);
    for _ in 0..lh * lw {
        low.push(rd.f64()?);
    }
    let lowpass = RealImage::new(lh, lw, low)?;
    let mut out_levels = Vec::with_capacity(levels);
    for level in 0..levels {
        let mut bands = Vec::with_capacity(ORIENTATIONS);
        for o in 0..ORIENTATIONS {
            let (h, w) = dims[level * ORIENTATIONS + o];
            let mut data = Vec::with_capacity(h * w);
            for _ in 0..h * w {
                let re = rd.f64()?;
                let im = rd.f64()?;
                data.push(Complex64::new(re, im));
            }
            bands.push(ComplexImage::new(h, w, data)?);
        }
        out_levels.push(DetailLevel {
            level: level + 1,
            bands,
        });
    }
    if rd.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after pyramid".into()));
    }
    Ok(ComplexPyramid {
        levels: out_levels,
        lowpass,
        meta: PyramidMeta {
            height,
            width,
            padded_height,
            padded_width,
            filter_set: FILTER_SET_ID.to_string(),
        },
    })
}
