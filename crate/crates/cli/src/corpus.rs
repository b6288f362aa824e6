//! Training corpus manifests and image fingerprints.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use phaseforge::numerics::io::{load_image, normalize_range};
use phaseforge::numerics::RealImage;
use phaseforge::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Pixel values as decoded, in [0, 1].
    None,
    /// Each crop stretched to span [0, 1].
    MinMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    /// Relative to the manifest root.
    pub path: PathBuf,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub size: usize,
    pub normalization: Normalization,
    pub seed: u64,
    pub entries: Vec<CorpusEntry>,
}

/// A decoded corpus image and its training crop.
pub struct CorpusImage {
    pub name: String,
    pub source: RealImage,
    pub crop: RealImage,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| ["pgm", "pnm", "png"].iter().any(|x| e.eq_ignore_ascii_case(x)))
}

impl CorpusManifest {
    /// Every PGM/PNG directly under `root`, in name order, each with a
    /// random `size x size` crop origin.
    pub fn scan(root: &Path, size: usize, normalization: Normalization, seed: u64) -> Result<Self> {
        let root = root.canonicalize().with_context(|| format!("corpus {}", root.display()))?;
        let mut files: Vec<PathBuf> = std::fs::read_dir(&root)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        files.sort();
        if files.is_empty() {
            return usage(format!("no PGM or PNG images in {}", root.display()));
        }
        let mut g = rng::stream(seed, "corpus");
        let mut entries = Vec::with_capacity(files.len());
        for f in files {
            let img = load_image(&f).with_context(|| format!("decoding {}", f.display()))?;
            let (h, w) = img.dims();
            if h < size || w < size {
                return usage(format!("{} is {h}x{w}, smaller than the {size}x{size} crop", f.display()));
            }
            entries.push(CorpusEntry {
                path: f.strip_prefix(&root)?.to_path_buf(),
                row: g.random_range(0..=h - size),
                col: g.random_range(0..=w - size),
            });
        }
        Ok(Self { root, size, normalization, seed, entries })
    }

    pub fn load(&self) -> Result<Vec<CorpusImage>> {
        self.entries
            .iter()
            .map(|e| {
                let path = self.root.join(&e.path);
                let source = load_image(&path).with_context(|| format!("decoding {}", path.display()))?;
                let mut crop = source
                    .crop(e.row, e.col, self.size, self.size)
                    .with_context(|| format!("cropping {}", path.display()))?;
                if self.normalization == Normalization::MinMax {
                    crop = normalize_range(&crop);
                }
                Ok(CorpusImage {
                    name: e.path.display().to_string(),
                    source,
                    crop,
                })
            })
            .collect()
    }
}

/// SHA-256 over the dimensions and little-endian pixel values, hex encoded.
pub fn pixel_hash(image: &RealImage) -> String {
    let mut h = Sha256::new();
    h.update((image.height() as u64).to_le_bytes());
    h.update((image.width() as u64).to_le_bytes());
    for v in image.data() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
