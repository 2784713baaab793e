//! Sampling ranges and corpus plan. None of the default ranges is
//! canonical; every one of them can be overridden from a TOML file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AugError, Result};
use crate::transform::TransformKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ranges {
    /// Area fraction kept by a resized crop.
    pub crop_scale: [f64; 2],
    /// Aspect ratio range of a resized crop (sampled log-uniformly).
    pub crop_ratio: [f64; 2],
    pub rotation_degrees: [f64; 2],
    /// Pixelization block edge in pixels.
    pub pixel_block: [u32; 2],
    /// Tiles per side for pixel shuffling.
    pub shuffle_grid: [u32; 2],
    /// Maximum inward corner displacement, as a fraction of the image side.
    pub perspective: f64,
    /// Maximum padding per side, as a fraction of the image side.
    pub padding: f64,
    pub jitter_brightness: f64,
    pub jitter_contrast: f64,
    pub jitter_saturation: f64,
    /// Hue shift in turns.
    pub jitter_hue: f64,
    pub blur_sigma: [f64; 2],
    /// Side of an overlaid foreground relative to the canvas side.
    pub overlay_scale: [f64; 2],
    pub underlay_opacity: [f64; 2],
    /// Emoji edge relative to the shorter canvas side.
    pub emoji_size: [f64; 2],
    pub emoji_opacity: [f64; 2],
    /// Text glyph height relative to the canvas height.
    pub text_height: [f64; 2],
    pub text_length: [u32; 2],
}

impl Default for Ranges {
    fn default() -> Self {
        Self {
            crop_scale: [0.3, 1.0],
            crop_ratio: [3.0 / 4.0, 4.0 / 3.0],
            rotation_degrees: [-45.0, 45.0],
            pixel_block: [4, 16],
            shuffle_grid: [2, 4],
            perspective: 0.5,
            padding: 0.25,
            jitter_brightness: 0.4,
            jitter_contrast: 0.4,
            jitter_saturation: 0.4,
            jitter_hue: 0.1,
            blur_sigma: [0.5, 3.0],
            overlay_scale: [0.3, 0.8],
            underlay_opacity: [0.5, 0.9],
            emoji_size: [0.1, 0.3],
            emoji_opacity: [0.6, 1.0],
            text_height: [0.05, 0.15],
            text_length: [3, 10],
        }
    }
}

/// How transforms are chosen for each copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugConfig {
    /// Fewest / most transforms per copy, drawn from `kinds` without
    /// replacement. A final resize is always appended.
    pub min_ops: usize,
    pub max_ops: usize,
    /// Kinds eligible for sampling. `resize` is implicit.
    pub kinds: Vec<TransformKind>,
    /// Directory of PNG emoji assets; built-in glyphs when unset.
    pub emoji_dir: Option<PathBuf>,
    pub ranges: Ranges,
}

impl Default for AugConfig {
    fn default() -> Self {
        Self {
            min_ops: 1,
            max_ops: 4,
            kinds: TransformKind::SAMPLED.to_vec(),
            emoji_dir: None,
            ranges: Ranges::default(),
        }
    }
}

impl AugConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| AugError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AugError::Config(m.to_string()));
        if self.min_ops > self.max_ops {
            return bad("min_ops exceeds max_ops");
        }
        if self.max_ops > self.kinds.len() {
            return bad("max_ops exceeds the number of enabled kinds");
        }
        if self.kinds.contains(&TransformKind::Resize) {
            return bad("resize is always applied last and cannot be listed in kinds");
        }
        let r = &self.ranges;
        let ordered = |x: [f64; 2]| x[0] <= x[1];
        let unit = |x: [f64; 2]| ordered(x) && x[0] >= 0.0 && x[1] <= 1.0;
        if !(unit(r.crop_scale) && r.crop_scale[0] > 0.0) {
            return bad("crop_scale must lie in (0, 1]");
        }
        if !(ordered(r.crop_ratio) && r.crop_ratio[0] > 0.0) {
            return bad("crop_ratio must be positive and ordered");
        }
        if !ordered(r.rotation_degrees) || !ordered(r.blur_sigma) || r.blur_sigma[0] <= 0.0 {
            return bad("rotation/blur ranges must be ordered, blur sigma positive");
        }
        if r.pixel_block[0] < 1 || r.pixel_block[0] > r.pixel_block[1] {
            return bad("pixel_block must be ordered and >= 1");
        }
        if r.shuffle_grid[0] < 1 || r.shuffle_grid[0] > r.shuffle_grid[1] {
            return bad("shuffle_grid must be ordered and >= 1");
        }
        if !(0.0..1.0).contains(&r.perspective) || !(0.0..0.5).contains(&r.padding) {
            return bad("perspective must be in [0, 1), padding in [0, 0.5)");
        }
        for j in [r.jitter_brightness, r.jitter_contrast, r.jitter_saturation] {
            if !(0.0..1.0).contains(&j) {
                return bad("jitter magnitudes must be in [0, 1)");
            }
        }
        if !(0.0..=0.5).contains(&r.jitter_hue) {
            return bad("jitter_hue must be in [0, 0.5]");
        }
        for (name, x) in [
            ("overlay_scale", r.overlay_scale),
            ("underlay_opacity", r.underlay_opacity),
            ("emoji_size", r.emoji_size),
            ("emoji_opacity", r.emoji_opacity),
            ("text_height", r.text_height),
        ] {
            if !(unit(x) && x[0] > 0.0) {
                return Err(AugError::Config(format!("{name} must lie in (0, 1]")));
            }
        }
        if r.text_length[0] < 1 || r.text_length[0] > r.text_length[1] {
            return bad("text_length must be ordered and >= 1");
        }
        Ok(())
    }
}

/// What to generate from a source directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusPlan {
    /// Edited copies per selected source (19 gives 20 images per id).
    pub copies_per_source: u32,
    /// Output edge length; copies are square.
    pub output_size: u32,
    /// Keep every `source_stride`-th source in sorted order.
    pub source_stride: usize,
    pub policy: AugConfig,
}

impl Default for CorpusPlan {
    fn default() -> Self {
        Self {
            copies_per_source: 19,
            output_size: 256,
            source_stride: 1,
            policy: AugConfig::default(),
        }
    }
}

impl CorpusPlan {
    pub fn validate(&self) -> Result<()> {
        if self.copies_per_source < 1 {
            return Err(AugError::Config("copies_per_source must be >= 1".into()));
        }
        if self.output_size < 1 || self.source_stride < 1 {
            return Err(AugError::Config("output_size and source_stride must be >= 1".into()));
        }
        self.policy.validate()
    }
}
