//! Detector training labels: one text file per copy with overlay boxes,
//! one `class cx cy w h` line per box, class 0 being the foreground.

use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Manifest;
use crate::error::Result;
use crate::geometry::BBox;

/// Six decimals, trailing zeros trimmed but at least one digit kept after
/// the point (`0.5`, `1.0`).
pub fn format_coord(v: f64) -> String {
    let s = format!("{v:.6}");
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

pub fn label_line(b: &BBox) -> String {
    format!("0 {} {} {} {}", format_coord(b.cx), format_coord(b.cy), format_coord(b.w), format_coord(b.h))
}

pub fn label_text(boxes: &[BBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        writeln!(out, "{}", label_line(b)).expect("write to String");
    }
    out
}

/// Writes `{copy_id}.txt` into `dir` for every record that has boxes and
/// returns how many files were written. Records without boxes are skipped.
pub fn emit_detection_labels(manifest: &Manifest, dir: &Path) -> Result<usize> {
    std::fs::create_dir_all(dir)?;
    let mut written = 0;
    for rec in &manifest.records {
        if rec.overlay_boxes.is_empty() {
            continue;
        }
        std::fs::write(dir.join(format!("{}.txt", rec.copy_id)), label_text(&rec.overlay_boxes))?;
        written += 1;
    }
    Ok(written)
}
