use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use phaseforge::numerics::io::{save_image, write_atomic};
use phaseforge::numerics::RealImage;

/// Output directory; every file is written atomically.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.path(name), contents.as_bytes()).with_context(|| format!("writing {name}"))
    }

    /// PNG or PGM by extension; values are clamped to [0, 1].
    pub fn image(&self, name: &str, image: &RealImage) -> Result<()> {
        save_image(&self.path(name), image).with_context(|| format!("writing {name}"))
    }
}
