//! Transform kinds, their sampled parameters, and per-copy sampling.
//!
//! Every random choice is made here. The stored parameters fully determine
//! the pixel operation, so a recorded list of transforms replays exactly.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assets::Assets;
use crate::config::{AugConfig, Ranges};
use crate::error::{AugError, Result};
use crate::font;

/// Transform kinds in canonical application order: geometric edits first,
/// then pixel-level and photometric edits, then compositing, then resize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    ResizedCrop,
    Rotation,
    Perspective,
    Padding,
    Hflip,
    PixelShuffle,
    Pixelization,
    ColorJitter,
    Blur,
    Grayscale,
    ImageUnderlay,
    ImageOverlay,
    EmojiOverlay,
    TextOverlay,
    Resize,
}

impl TransformKind {
    pub const ALL: [TransformKind; 15] = [
        Self::ResizedCrop,
        Self::Rotation,
        Self::Perspective,
        Self::Padding,
        Self::Hflip,
        Self::PixelShuffle,
        Self::Pixelization,
        Self::ColorJitter,
        Self::Blur,
        Self::Grayscale,
        Self::ImageUnderlay,
        Self::ImageOverlay,
        Self::EmojiOverlay,
        Self::TextOverlay,
        Self::Resize,
    ];

    /// Kinds eligible for random selection; resize always closes a copy.
    pub const SAMPLED: [TransformKind; 14] = {
        let mut out = [Self::ResizedCrop; 14];
        let mut i = 0;
        while i < 14 {
            out[i] = Self::ALL[i];
            i += 1;
        }
        out
    };

    pub fn is_overlay(self) -> bool {
        matches!(
            self,
            Self::ImageUnderlay | Self::ImageOverlay | Self::EmojiOverlay | Self::TextOverlay
        )
    }
}

/// Image composited with the copy in underlay/overlay transforms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Background {
    /// Another source image, resized to the canvas.
    Source { id: String },
    /// Seeded block noise, used when no other source exists.
    Noise { seed: u64 },
}

/// A transform with all sampled parameters. Pixel quantities refer to the
/// image the transform is applied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// Crop the pixel rectangle, then resize back to the input size.
    ResizedCrop { x: u32, y: u32, width: u32, height: u32 },
    /// Rotation about the image center, canvas size kept, black fill.
    Rotation { degrees: f64 },
    /// Corner displacements (top-left, top-right, bottom-right,
    /// bottom-left), inward, as fractions of width and height.
    Perspective { offsets: [[f64; 2]; 4] },
    Padding { left: u32, top: u32, right: u32, bottom: u32, color: [u8; 3] },
    Hflip,
    /// Permute the tiles of a `grid × grid` split with a seeded shuffle.
    PixelShuffle { grid: u32, seed: u64 },
    /// Replace each `block × block` cell with its mean color.
    Pixelization { block: u32 },
    /// Multiplicative brightness/contrast/saturation factors and a hue
    /// shift in turns.
    ColorJitter { brightness: f64, contrast: f64, saturation: f64, hue: f64 },
    Blur { sigma: f64 },
    Grayscale,
    /// Blend a background beneath the whole image.
    ImageUnderlay { background: Background, opacity: f64 },
    /// Shrink the image by `scale` and paste it onto a background at the
    /// fractional free-space position (`x`, `y`).
    ImageOverlay { background: Background, scale: f64, x: f64, y: f64 },
    EmojiOverlay { emoji: usize, size: u32, x: f64, y: f64, opacity: f64 },
    /// Text in the built-in font, `scale` image pixels per font pixel.
    TextOverlay { text: String, scale: u32, color: [u8; 3], x: f64, y: f64 },
    Resize { width: u32, height: u32 },
}

impl Transform {
    pub fn kind(&self) -> TransformKind {
        match self {
            Self::ResizedCrop { .. } => TransformKind::ResizedCrop,
            Self::Rotation { .. } => TransformKind::Rotation,
            Self::Perspective { .. } => TransformKind::Perspective,
            Self::Padding { .. } => TransformKind::Padding,
            Self::Hflip => TransformKind::Hflip,
            Self::PixelShuffle { .. } => TransformKind::PixelShuffle,
            Self::Pixelization { .. } => TransformKind::Pixelization,
            Self::ColorJitter { .. } => TransformKind::ColorJitter,
            Self::Blur { .. } => TransformKind::Blur,
            Self::Grayscale => TransformKind::Grayscale,
            Self::ImageUnderlay { .. } => TransformKind::ImageUnderlay,
            Self::ImageOverlay { .. } => TransformKind::ImageOverlay,
            Self::EmojiOverlay { .. } => TransformKind::EmojiOverlay,
            Self::TextOverlay { .. } => TransformKind::TextOverlay,
            Self::Resize { .. } => TransformKind::Resize,
        }
    }
}

/// Picks between `min_ops` and `max_ops` distinct kinds from the policy and
/// returns them in canonical order, followed by `Resize`.
pub fn sample_kinds<R: Rng>(rng: &mut R, cfg: &AugConfig) -> Vec<TransformKind> {
    let n = rng.random_range(cfg.min_ops..=cfg.max_ops);
    let mut kinds: Vec<TransformKind> = cfg.kinds.choose_multiple(rng, n).copied().collect();
    kinds.sort();
    kinds.dedup();
    kinds.push(TransformKind::Resize);
    kinds
}

/// Inputs to parameter sampling besides the random stream.
pub struct SampleContext<'a> {
    pub ranges: &'a Ranges,
    pub assets: &'a Assets,
    /// Source of the copy being built; never chosen as its own background.
    pub source_id: &'a str,
    pub output_size: u32,
}

fn uniform<R: Rng>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

fn symmetric<R: Rng>(rng: &mut R, m: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        rng.random_range(-m..m)
    }
}

fn color<R: Rng>(rng: &mut R) -> [u8; 3] {
    [rng.random(), rng.random(), rng.random()]
}

fn background<R: Rng>(rng: &mut R, ctx: &SampleContext) -> Background {
    let others: Vec<&str> = ctx
        .assets
        .source_ids()
        .into_iter()
        .filter(|id| *id != ctx.source_id)
        .collect();
    match others.choose(rng) {
        Some(id) => Background::Source { id: id.to_string() },
        None => Background::Noise { seed: rng.random() },
    }
}

fn crop_rect<R: Rng>(rng: &mut R, r: &Ranges, (w, h): (u32, u32)) -> (u32, u32, u32, u32) {
    let (log_lo, log_hi) = (r.crop_ratio[0].ln(), r.crop_ratio[1].ln());
    for _ in 0..10 {
        let area = uniform(rng, r.crop_scale);
        let ratio = uniform(rng, [log_lo, log_hi]).exp();
        let fw = (area * ratio).sqrt();
        let fh = (area / ratio).sqrt();
        if fw <= 1.0 && fh <= 1.0 {
            let cw = (fw * w as f64).floor() as u32;
            let ch = (fh * h as f64).floor() as u32;
            let x = rng.random_range(0..=w - cw.min(w));
            let y = rng.random_range(0..=h - ch.min(h));
            return (x, y, cw, ch);
        }
    }
    (0, 0, w, h)
}

/// Samples parameters for `kind` given the current image size.
pub fn sample_transform<R: Rng>(
    kind: TransformKind,
    rng: &mut R,
    dims: (u32, u32),
    ctx: &SampleContext,
) -> Result<Transform> {
    let r = ctx.ranges;
    let (w, h) = dims;
    if w == 0 || h == 0 {
        return Err(AugError::EmptyImage);
    }
    Ok(match kind {
        TransformKind::ResizedCrop => {
            let mut rect = crop_rect(rng, r, dims);
            if rect.2 == 0 || rect.3 == 0 {
                rect = crop_rect(rng, r, dims);
            }
            if rect.2 == 0 || rect.3 == 0 {
                return Err(AugError::Degenerate("crop region"));
            }
            Transform::ResizedCrop { x: rect.0, y: rect.1, width: rect.2, height: rect.3 }
        }
        TransformKind::Rotation => Transform::Rotation { degrees: uniform(rng, r.rotation_degrees) },
        TransformKind::Perspective => {
            let half = r.perspective / 2.0;
            let mut offsets = [[0.0; 2]; 4];
            for o in &mut offsets {
                *o = [uniform(rng, [0.0, half]), uniform(rng, [0.0, half])];
            }
            Transform::Perspective { offsets }
        }
        TransformKind::Padding => {
            let mut side = |n: u32| (uniform(rng, [0.0, r.padding]) * n as f64).round() as u32;
            let (left, top, right, bottom) = (side(w), side(h), side(w), side(h));
            Transform::Padding { left, top, right, bottom, color: color(rng) }
        }
        TransformKind::Hflip => Transform::Hflip,
        TransformKind::PixelShuffle => Transform::PixelShuffle {
            grid: rng.random_range(r.shuffle_grid[0]..=r.shuffle_grid[1]),
            seed: rng.random(),
        },
        TransformKind::Pixelization => Transform::Pixelization {
            block: rng.random_range(r.pixel_block[0]..=r.pixel_block[1]),
        },
        TransformKind::ColorJitter => Transform::ColorJitter {
            brightness: 1.0 + symmetric(rng, r.jitter_brightness),
            contrast: 1.0 + symmetric(rng, r.jitter_contrast),
            saturation: 1.0 + symmetric(rng, r.jitter_saturation),
            hue: symmetric(rng, r.jitter_hue),
        },
        TransformKind::Blur => Transform::Blur { sigma: uniform(rng, r.blur_sigma) },
        TransformKind::Grayscale => Transform::Grayscale,
        TransformKind::ImageUnderlay => Transform::ImageUnderlay {
            background: background(rng, ctx),
            opacity: uniform(rng, r.underlay_opacity),
        },
        TransformKind::ImageOverlay => Transform::ImageOverlay {
            background: background(rng, ctx),
            scale: uniform(rng, r.overlay_scale),
            x: rng.random(),
            y: rng.random(),
        },
        TransformKind::EmojiOverlay => {
            let count = ctx.assets.emoji_count();
            if count == 0 {
                return Err(AugError::MissingAsset("no emoji available".into()));
            }
            let side = w.min(h) as f64;
            Transform::EmojiOverlay {
                emoji: rng.random_range(0..count),
                size: ((uniform(rng, r.emoji_size) * side).round() as u32).max(1),
                x: rng.random(),
                y: rng.random(),
                opacity: uniform(rng, r.emoji_opacity),
            }
        }
        TransformKind::TextOverlay => {
            let len = rng.random_range(r.text_length[0]..=r.text_length[1]) as usize;
            let alphabet: Vec<char> = font::ALPHABET.chars().collect();
            let mut text: String = (0..len).map(|_| *alphabet.choose(rng).expect("alphabet")).collect();
            let target = uniform(rng, r.text_height) * h as f64;
            let mut scale = ((target / font::GLYPH_H as f64).round() as u32).max(1);
            let fits = |scale: u32| ((w / scale + 1) / font::ADVANCE) as usize;
            if fits(scale) == 0 {
                scale = 1;
            }
            text.truncate(fits(scale).max(1));
            Transform::TextOverlay { text, scale, color: color(rng), x: rng.random(), y: rng.random() }
        }
        TransformKind::Resize => Transform::Resize { width: ctx.output_size, height: ctx.output_size },
    })
}
