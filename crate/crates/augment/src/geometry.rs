use serde::{Deserialize, Serialize};

/// Axis-aligned box in normalized image coordinates: center, width and
/// height as fractions of the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

/// Pixel-space rectangle `[x0, x1) × [y0, y1)` in continuous coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self {
            x0: x,
            y0: y,
            x1: x + w,
            y1: y + h,
        }
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [(self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1)]
    }

    /// Bounding rectangle of a point set.
    pub fn bounding(points: &[(f64, f64)]) -> Self {
        let mut r = Rect {
            x0: f64::INFINITY,
            y0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for &(x, y) in points {
            r.x0 = r.x0.min(x);
            r.y0 = r.y0.min(y);
            r.x1 = r.x1.max(x);
            r.y1 = r.y1.max(y);
        }
        r
    }

    /// Clips to a `width × height` canvas; `None` if nothing remains.
    pub fn clip(&self, width: u32, height: u32) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(0.0),
            y0: self.y0.max(0.0),
            x1: self.x1.min(width as f64),
            y1: self.y1.min(height as f64),
        };
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }
}

impl BBox {
    pub const FULL: BBox = BBox {
        cx: 0.5,
        cy: 0.5,
        w: 1.0,
        h: 1.0,
    };

    pub fn from_rect(r: &Rect, width: u32, height: u32) -> Self {
        let (w, h) = (width as f64, height as f64);
        BBox {
            cx: (r.x0 + r.x1) / 2.0 / w,
            cy: (r.y0 + r.y1) / 2.0 / h,
            w: (r.x1 - r.x0) / w,
            h: (r.y1 - r.y0) / h,
        }
    }

    pub fn to_rect(&self, width: u32, height: u32) -> Rect {
        let (w, h) = (width as f64, height as f64);
        Rect {
            x0: (self.cx - self.w / 2.0) * w,
            y0: (self.cy - self.h / 2.0) * h,
            x1: (self.cx + self.w / 2.0) * w,
            y1: (self.cy + self.h / 2.0) * h,
        }
    }

    /// True when the box lies in the unit square with positive extent.
    pub fn is_valid(&self) -> bool {
        const EPS: f64 = 1e-9;
        self.w > 0.0
            && self.h > 0.0
            && self.cx - self.w / 2.0 >= -EPS
            && self.cy - self.h / 2.0 >= -EPS
            && self.cx + self.w / 2.0 <= 1.0 + EPS
            && self.cy + self.h / 2.0 <= 1.0 + EPS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_box_roundtrip() {
        let r = Rect::from_xywh(64.0, 32.0, 128.0, 64.0);
        let b = BBox::from_rect(&r, 256, 128);
        assert_eq!(b, BBox { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5 });
        assert_eq!(b.to_rect(256, 128), r);
        assert!(b.is_valid());
        assert!(BBox::FULL.is_valid());
        assert!(!BBox { cx: 0.9, cy: 0.5, w: 0.4, h: 0.1 }.is_valid());
    }

    #[test]
    fn clipping() {
        let r = Rect::from_xywh(-10.0, 5.0, 20.0, 10.0);
        assert_eq!(r.clip(100, 100), Some(Rect { x0: 0.0, y0: 5.0, x1: 10.0, y1: 15.0 }));
        assert_eq!(Rect::from_xywh(200.0, 0.0, 5.0, 5.0).clip(100, 100), None);
    }
}
