//! Pixel operations for each transform and the matching bounding-box maps.

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use imageproc::geometric_transformations::{warp, Border, Interpolation, Projection};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::assets::Assets;
use crate::error::{AugError, Result};
use crate::font;
use crate::geometry::{BBox, Rect};
use crate::rng::stream;
use crate::transform::{Background, Transform};

/// Output of one transform: the new image and, for compositing kinds, the
/// foreground box on the new canvas.
#[derive(Debug, Clone)]
pub struct Applied {
    pub image: RgbImage,
    pub overlay_box: Option<BBox>,
}

/// Cell edge of the block noise used for `Background::Noise`.
const NOISE_CELL: u32 = 16;

/// Luma with integer weights; exact on gray pixels, so grayscale is idempotent.
fn luma(p: &Rgb<u8>) -> u8 {
    ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8
}

fn to_u8(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn rotation_projection(degrees: f64, (w, h): (u32, u32)) -> Projection {
    let (cx, cy) = (w as f32 / 2.0, h as f32 / 2.0);
    Projection::translate(cx, cy)
        * Projection::rotate(degrees.to_radians() as f32)
        * Projection::translate(-cx, -cy)
}

fn perspective_projection(offsets: &[[f64; 2]; 4], (w, h): (u32, u32)) -> Result<Projection> {
    let (wf, hf) = (w as f32, h as f32);
    let from = [(0.0, 0.0), (wf, 0.0), (wf, hf), (0.0, hf)];
    let sign = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
    let mut to = from;
    for i in 0..4 {
        to[i].0 += sign[i].0 * offsets[i][0] as f32 * wf;
        to[i].1 += sign[i].1 * offsets[i][1] as f32 * hf;
    }
    Projection::from_control_points(from, to).ok_or(AugError::Degenerate("perspective"))
}

/// Size and top-left corner of a foreground of `scale` × canvas placed at
/// fractional free-space position (`x`, `y`).
pub fn overlay_placement(scale: f64, x: f64, y: f64, (w, h): (u32, u32)) -> (u32, u32, u32, u32) {
    let fw = ((scale * w as f64).round() as u32).clamp(1, w);
    let fh = ((scale * h as f64).round() as u32).clamp(1, h);
    let px = (x * (w - fw) as f64).round() as u32;
    let py = (y * (h - fh) as f64).round() as u32;
    (fw, fh, px, py)
}

fn free_position(x: f64, y: f64, (w, h): (u32, u32), (fw, fh): (u32, u32)) -> (u32, u32) {
    (
        (x * w.saturating_sub(fw) as f64).round() as u32,
        (y * h.saturating_sub(fh) as f64).round() as u32,
    )
}

fn background_image(bg: &Background, assets: &Assets, (w, h): (u32, u32)) -> Result<RgbImage> {
    match bg {
        Background::Source { id } => {
            let src = assets.source(id)?;
            if src.width() == 0 || src.height() == 0 {
                return Err(AugError::EmptyImage);
            }
            Ok(imageops::resize(&src, w, h, FilterType::Triangle))
        }
        Background::Noise { seed } => {
            let mut rng = stream(*seed);
            let cols = w.div_ceil(NOISE_CELL);
            let rows = h.div_ceil(NOISE_CELL);
            let cells: Vec<[u8; 3]> = (0..cols * rows).map(|_| rng.random()).collect();
            Ok(RgbImage::from_fn(w, h, |x, y| {
                Rgb(cells[((y / NOISE_CELL) * cols + x / NOISE_CELL) as usize])
            }))
        }
    }
}

fn pixelize(img: &RgbImage, block: u32) -> RgbImage {
    let (w, h) = img.dimensions();
    let mut out = img.clone();
    for by in (0..h).step_by(block as usize) {
        for bx in (0..w).step_by(block as usize) {
            let (x1, y1) = ((bx + block).min(w), (by + block).min(h));
            let mut sum = [0u64; 3];
            for y in by..y1 {
                for x in bx..x1 {
                    let p = img.get_pixel(x, y);
                    for c in 0..3 {
                        sum[c] += p[c] as u64;
                    }
                }
            }
            let n = ((x1 - bx) * (y1 - by)) as u64;
            let mean = Rgb(sum.map(|s| ((s + n / 2) / n) as u8));
            for y in by..y1 {
                for x in bx..x1 {
                    out.put_pixel(x, y, mean);
                }
            }
        }
    }
    out
}

/// Permutes the `grid × grid` full tiles; a right/bottom remainder narrower
/// than a tile stays in place.
fn shuffle_tiles(img: &RgbImage, grid: u32, seed: u64) -> RgbImage {
    let (w, h) = img.dimensions();
    let (tw, th) = (w / grid, h / grid);
    if tw == 0 || th == 0 {
        return img.clone();
    }
    let mut order: Vec<u32> = (0..grid * grid).collect();
    order.shuffle(&mut stream(seed));
    let mut out = img.clone();
    for (dst, &src) in order.iter().enumerate() {
        let (dx, dy) = ((dst as u32 % grid) * tw, (dst as u32 / grid) * th);
        let (sx, sy) = ((src % grid) * tw, (src / grid) * th);
        for y in 0..th {
            for x in 0..tw {
                out.put_pixel(dx + x, dy + y, *img.get_pixel(sx + x, sy + y));
            }
        }
    }
    out
}

fn rgb_to_hsv([r, g, b]: [f32; 3]) -> [f32; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / d).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / d + 2.0) / 6.0
    } else {
        ((r - g) / d + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    [h, s, max]
}

fn hsv_to_rgb([h, s, v]: [f32; 3]) -> [f32; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let c = v * s;
    let x = c * (1.0 - (h6 % 2.0 - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match h6 as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    [r + m, g + m, b + m]
}

fn jitter(img: &RgbImage, brightness: f64, contrast: f64, saturation: f64, hue: f64) -> RgbImage {
    let clamp = |v: f32| v.clamp(0.0, 255.0);
    let gray = |p: [f32; 3]| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    let (b, c, s, hu) = (brightness as f32, contrast as f32, saturation as f32, hue as f32);
    let mut px: Vec<[f32; 3]> = img
        .pixels()
        .map(|p| [0, 1, 2].map(|i| clamp(p[i] as f32 * b)))
        .collect();
    let mean = if px.is_empty() {
        0.0
    } else {
        (px.iter().map(|p| gray(*p) as f64).sum::<f64>() / px.len() as f64) as f32
    };
    for p in &mut px {
        *p = p.map(|v| clamp((v - mean) * c + mean));
        let g = gray(*p);
        *p = p.map(|v| clamp((v - g) * s + g));
        if hu != 0.0 {
            let [h, sat, val] = rgb_to_hsv(p.map(|v| v / 255.0));
            *p = hsv_to_rgb([h + hu, sat, val]).map(|v| clamp(v * 255.0));
        }
    }
    let (w, h) = img.dimensions();
    RgbImage::from_fn(w, h, |x, y| Rgb(px[(y * w + x) as usize].map(to_u8)))
}

fn blend(a: &Rgb<u8>, b: &Rgb<u8>, alpha: f32) -> Rgb<u8> {
    Rgb([0, 1, 2].map(|i| to_u8(alpha * a[i] as f32 + (1.0 - alpha) * b[i] as f32)))
}

/// Applies `t` to `img`. Deterministic in (`img`, `t`, asset contents).
pub fn apply_transform(img: &RgbImage, t: &Transform, assets: &Assets) -> Result<Applied> {
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 {
        return Err(AugError::EmptyImage);
    }
    let plain = |image| Ok(Applied { image, overlay_box: None });
    match t {
        Transform::ResizedCrop { x, y, width, height } => {
            if *width == 0 || *height == 0 {
                return Err(AugError::Degenerate("crop region"));
            }
            if x + width > w || y + height > h {
                return Err(AugError::Degenerate("crop outside image"));
            }
            let crop = imageops::crop_imm(img, *x, *y, *width, *height).to_image();
            plain(imageops::resize(&crop, w, h, FilterType::Triangle))
        }
        Transform::Rotation { degrees } => plain(warp(
            img,
            rotation_projection(*degrees, (w, h)),
            Interpolation::Bilinear,
            Border::Constant(Rgb([0, 0, 0])),
        )),
        Transform::Perspective { offsets } => plain(warp(
            img,
            perspective_projection(offsets, (w, h))?,
            Interpolation::Bilinear,
            Border::Constant(Rgb([0, 0, 0])),
        )),
        Transform::Padding { left, top, right, bottom, color } => {
            let mut out = RgbImage::from_pixel(w + left + right, h + top + bottom, Rgb(*color));
            imageops::replace(&mut out, img, *left as i64, *top as i64);
            plain(out)
        }
        Transform::Hflip => plain(imageops::flip_horizontal(img)),
        Transform::PixelShuffle { grid, seed } => {
            if *grid == 0 {
                return Err(AugError::Degenerate("shuffle grid"));
            }
            plain(shuffle_tiles(img, *grid, *seed))
        }
        Transform::Pixelization { block } => {
            if *block == 0 {
                return Err(AugError::Degenerate("pixel block"));
            }
            plain(pixelize(img, *block))
        }
        Transform::ColorJitter { brightness, contrast, saturation, hue } => {
            plain(jitter(img, *brightness, *contrast, *saturation, *hue))
        }
        Transform::Blur { sigma } => {
            if *sigma <= 0.0 {
                return Err(AugError::Degenerate("blur sigma"));
            }
            plain(imageproc::filter::gaussian_blur_f32(img, *sigma as f32))
        }
        Transform::Grayscale => {
            let mut out = img.clone();
            for p in out.pixels_mut() {
                let l = luma(p);
                *p = Rgb([l, l, l]);
            }
            plain(out)
        }
        Transform::ImageUnderlay { background, opacity } => {
            let bg = background_image(background, assets, (w, h))?;
            let a = *opacity as f32;
            let image = RgbImage::from_fn(w, h, |x, y| blend(img.get_pixel(x, y), bg.get_pixel(x, y), a));
            Ok(Applied { image, overlay_box: Some(BBox::FULL) })
        }
        Transform::ImageOverlay { background, scale, x, y } => {
            let (fw, fh, px, py) = overlay_placement(*scale, *x, *y, (w, h));
            let mut canvas = background_image(background, assets, (w, h))?;
            let fg = imageops::resize(img, fw, fh, FilterType::Triangle);
            imageops::replace(&mut canvas, &fg, px as i64, py as i64);
            let rect = Rect::from_xywh(px as f64, py as f64, fw as f64, fh as f64);
            Ok(Applied { image: canvas, overlay_box: Some(BBox::from_rect(&rect, w, h)) })
        }
        Transform::EmojiOverlay { emoji, size, x, y, opacity } => {
            let s = (*size).clamp(1, w.min(h));
            let glyph = assets.emoji(*emoji, s)?;
            let (px, py) = free_position(*x, *y, (w, h), (s, s));
            let mut out = img.clone();
            for (ex, ey, e) in glyph.enumerate_pixels() {
                let a = e[3] as f32 / 255.0 * *opacity as f32;
                if a > 0.0 {
                    let dst = out.get_pixel_mut(px + ex, py + ey);
                    *dst = blend(&Rgb([e[0], e[1], e[2]]), dst, a);
                }
            }
            let rect = Rect::from_xywh(px as f64, py as f64, s as f64, s as f64);
            Ok(Applied { image: out, overlay_box: Some(BBox::from_rect(&rect, w, h)) })
        }
        Transform::TextOverlay { text, scale, color, x, y } => {
            if *scale == 0 || text.is_empty() {
                return Err(AugError::Degenerate("text"));
            }
            let (tw, th) = font::text_size(text, *scale);
            let (px, py) = free_position(*x, *y, (w, h), (tw, th));
            let mut out = img.clone();
            for (i, c) in text.chars().enumerate() {
                let gx = px + i as u32 * font::ADVANCE * scale;
                for row in 0..font::GLYPH_H {
                    for col in 0..font::GLYPH_W {
                        if !font::is_set(c, col, row) {
                            continue;
                        }
                        for dy in 0..*scale {
                            for dx in 0..*scale {
                                let (ox, oy) = (gx + col * scale + dx, py + row * scale + dy);
                                if ox < w && oy < h {
                                    out.put_pixel(ox, oy, Rgb(*color));
                                }
                            }
                        }
                    }
                }
            }
            let overlay_box = Rect::from_xywh(px as f64, py as f64, tw as f64, th as f64)
                .clip(w, h)
                .map(|r| BBox::from_rect(&r, w, h));
            Ok(Applied { image: out, overlay_box })
        }
        Transform::Resize { width, height } => {
            if *width == 0 || *height == 0 {
                return Err(AugError::Degenerate("resize target"));
            }
            if (*width, *height) == (w, h) {
                plain(img.clone())
            } else {
                plain(imageops::resize(img, *width, *height, FilterType::Triangle))
            }
        }
    }
}

fn map_points(p: &Projection, r: &Rect) -> Rect {
    let pts: Vec<(f64, f64)> = r
        .corners()
        .iter()
        .map(|&(x, y)| {
            let (u, v) = *p * (x as f32, y as f32);
            (u as f64, v as f64)
        })
        .collect();
    Rect::bounding(&pts)
}

/// Carries boxes from a `input`-sized canvas through `t` onto its
/// `output`-sized result. Boxes are clipped to the new canvas and dropped
/// when nothing remains.
pub fn map_boxes(t: &Transform, boxes: &[BBox], input: (u32, u32), output: (u32, u32)) -> Result<Vec<BBox>> {
    let (w, h) = input;
    let mapped: Box<dyn Fn(Rect) -> Option<Rect>> = match t {
        Transform::Hflip => {
            return Ok(boxes.iter().map(|b| BBox { cx: 1.0 - b.cx, ..*b }).collect());
        }
        Transform::ResizedCrop { x, y, width, height } => {
            let (x, y, cw, ch) = (*x as f64, *y as f64, *width as f64, *height as f64);
            let (sx, sy) = (w as f64 / cw, h as f64 / ch);
            Box::new(move |r: Rect| {
                let r = Rect { x0: r.x0 - x, y0: r.y0 - y, x1: r.x1 - x, y1: r.y1 - y }.clip(*width, *height)?;
                Some(Rect { x0: r.x0 * sx, y0: r.y0 * sy, x1: r.x1 * sx, y1: r.y1 * sy })
            })
        }
        Transform::Rotation { degrees } => {
            let p = rotation_projection(*degrees, input);
            Box::new(move |r| Some(map_points(&p, &r)))
        }
        Transform::Perspective { offsets } => {
            let p = perspective_projection(offsets, input)?;
            Box::new(move |r| Some(map_points(&p, &r)))
        }
        Transform::Padding { left, top, .. } => {
            let (dx, dy) = (*left as f64, *top as f64);
            Box::new(move |r: Rect| Some(Rect { x0: r.x0 + dx, y0: r.y0 + dy, x1: r.x1 + dx, y1: r.y1 + dy }))
        }
        Transform::ImageOverlay { scale, x, y, .. } => {
            let (fw, fh, px, py) = overlay_placement(*scale, *x, *y, input);
            let (sx, sy) = (fw as f64 / w as f64, fh as f64 / h as f64);
            let (px, py) = (px as f64, py as f64);
            Box::new(move |r: Rect| {
                Some(Rect { x0: px + r.x0 * sx, y0: py + r.y0 * sy, x1: px + r.x1 * sx, y1: py + r.y1 * sy })
            })
        }
        _ => return Ok(boxes.to_vec()),
    };
    Ok(boxes
        .iter()
        .filter_map(|b| mapped(b.to_rect(w, h)))
        .filter_map(|r| r.clip(output.0, output.1))
        .map(|r| BBox::from_rect(&r, output.0, output.1))
        .collect())
}

/// Runs `transforms` in order, accumulating overlay boxes mapped onto the
/// final canvas.
pub fn apply_all(img: &RgbImage, transforms: &[Transform], assets: &Assets) -> Result<(RgbImage, Vec<BBox>)> {
    let mut cur = img.clone();
    let mut boxes = Vec::new();
    for t in transforms {
        let step = apply_transform(&cur, t, assets)?;
        boxes = map_boxes(t, &boxes, cur.dimensions(), step.image.dimensions())?;
        boxes.extend(step.overlay_box);
        cur = step.image;
    }
    Ok((cur, boxes))
}
