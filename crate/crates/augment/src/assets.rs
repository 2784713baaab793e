//! Images that transforms composite onto a copy: other sources used as
//! backgrounds, and emoji glyphs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{Rgba, RgbaImage, RgbImage};

use crate::error::{AugError, Result};

/// Number of procedurally drawn emoji available without an asset directory.
pub const BUILTIN_EMOJI: usize = 4;

#[derive(Debug, Default)]
pub struct Assets {
    source_paths: BTreeMap<String, PathBuf>,
    source_images: BTreeMap<String, RgbImage>,
    emoji: Vec<RgbaImage>,
    emoji_from_dir: bool,
}

impl Assets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_source_path(&mut self, id: impl Into<String>, path: impl Into<PathBuf>) {
        self.source_paths.insert(id.into(), path.into());
    }

    pub fn add_source_image(&mut self, id: impl Into<String>, img: RgbImage) {
        self.source_images.insert(id.into(), img);
    }

    /// Loads every `*.png` in `dir` (sorted by name) as an emoji.
    /// An existing directory without any PNG is an error.
    pub fn load_emoji_dir(&mut self, dir: &Path) -> Result<()> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| AugError::MissingAsset(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(AugError::MissingAsset(format!("no PNG emoji in {}", dir.display())));
        }
        self.emoji = files
            .iter()
            .map(|p| Ok(image::open(p)?.to_rgba8()))
            .collect::<Result<_>>()?;
        self.emoji_from_dir = true;
        Ok(())
    }

    /// Ids usable as overlay/underlay backgrounds, sorted.
    pub fn source_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .source_paths
            .keys()
            .chain(self.source_images.keys())
            .map(String::as_str)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn source(&self, id: &str) -> Result<RgbImage> {
        if let Some(img) = self.source_images.get(id) {
            return Ok(img.clone());
        }
        let path = self
            .source_paths
            .get(id)
            .ok_or_else(|| AugError::MissingAsset(format!("background source {id:?}")))?;
        Ok(image::open(path)?.to_rgb8())
    }

    pub fn emoji_count(&self) -> usize {
        if self.emoji_from_dir {
            self.emoji.len()
        } else {
            BUILTIN_EMOJI
        }
    }

    /// Emoji `index` at `size × size` pixels.
    pub fn emoji(&self, index: usize, size: u32) -> Result<RgbaImage> {
        if self.emoji_from_dir {
            let src = self
                .emoji
                .get(index)
                .ok_or_else(|| AugError::MissingAsset(format!("emoji #{index}")))?;
            Ok(image::imageops::resize(src, size, size, image::imageops::FilterType::Triangle))
        } else if index < BUILTIN_EMOJI {
            Ok(draw_builtin(index, size))
        } else {
            Err(AugError::MissingAsset(format!("emoji #{index}")))
        }
    }
}

fn draw_builtin(index: usize, size: u32) -> RgbaImage {
    let s = size as f64;
    RgbaImage::from_fn(size, size, |px, py| {
        // centered coordinates in [-1, 1], y up
        let x = (px as f64 + 0.5) / s * 2.0 - 1.0;
        let y = 1.0 - (py as f64 + 0.5) / s * 2.0;
        let r2 = x * x + y * y;
        let clear = Rgba([0, 0, 0, 0]);
        match index {
            0 => {
                if r2 > 0.95 * 0.95 {
                    clear
                } else if ((x.abs() - 0.35).powi(2) + (y - 0.3).powi(2)) < 0.12 * 0.12
                    || (y < -0.05 && (0.45..0.6).contains(&((x * x + (y + 0.05).powi(2)).sqrt())))
                {
                    Rgba([40, 25, 10, 255])
                } else {
                    Rgba([255, 204, 50, 255])
                }
            }
            1 => {
                let (hx, hy) = (x * 1.15, y * 1.15 + 0.15);
                let f = (hx * hx + hy * hy - 1.0).powi(3) - hx * hx * hy.powi(3);
                if f <= 0.0 {
                    Rgba([220, 30, 60, 255])
                } else {
                    clear
                }
            }
            2 => {
                if x.abs().sqrt() + y.abs().sqrt() <= 0.95 {
                    Rgba([255, 140, 0, 255])
                } else {
                    clear
                }
            }
            _ => {
                if r2 > 0.9 * 0.9 {
                    clear
                } else if r2 > 0.6 * 0.6 {
                    Rgba([30, 120, 230, 255])
                } else {
                    Rgba([240, 240, 255, 255])
                }
            }
        }
    })
}
