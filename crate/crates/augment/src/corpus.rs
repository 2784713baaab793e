//! Corpus generation: edited copies of every selected source, a manifest of
//! applied transforms, copy→source ground truth and overlay labels.
//!
//! Layout under the output directory:
//!
//! ```text
//! copies/{source_id}_{index:02}.png
//! labels/{copy_id}.txt
//! manifest.json
//! truth.csv          query_id,reference_id  (copy id, source id)
//! ```

use std::fs::File;
use std::io::{BufWriter, Cursor};
use std::path::{Path, PathBuf};

use copydesc_core::metrics::GroundTruth;
use copydesc_core::pairs::write_truth;
use image::{ImageFormat, RgbImage};
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assets::Assets;
use crate::config::CorpusPlan;
use crate::error::{AugError, Result};
use crate::geometry::BBox;
use crate::labels::emit_detection_labels;
use crate::ops::{apply_transform, map_boxes};
use crate::rng::{copy_seed, stream};
use crate::transform::{sample_kinds, sample_transform, SampleContext, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugRecord {
    pub source_id: String,
    pub copy_id: String,
    pub seed: u64,
    pub transforms: Vec<Transform>,
    /// Foreground boxes on the final canvas, normalized to [0, 1].
    pub overlay_boxes: Vec<BBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub plan: CorpusPlan,
    /// Sorted by copy id.
    pub records: Vec<AugRecord>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    pub fn truth(&self) -> Result<GroundTruth> {
        Ok(GroundTruth::from_pairs(
            self.records.iter().map(|r| (r.copy_id.clone(), r.source_id.clone())),
        )?)
    }
}

pub fn copy_id(source_id: &str, index: u32) -> String {
    format!("{source_id}_{index:02}")
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| ["png", "jpg", "jpeg"].iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Image files in `dir` as `(id, path)` sorted by file name, id being the
/// file stem. A stem seen twice keeps its first file.
pub fn discover_sources(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    paths.sort();
    let mut out: Vec<(String, PathBuf)> = Vec::with_capacity(paths.len());
    for p in paths {
        let Some(id) = p.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            warn!("event=skip_source path={:?} reason=non_utf8_name", p);
            continue;
        };
        if out.iter().any(|(seen, _)| *seen == id) {
            warn!("event=skip_source path={:?} reason=duplicate_id id={id}", p);
            continue;
        }
        out.push((id, p));
    }
    Ok(out)
}

fn load_source(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)?.to_rgb8();
    if img.width() == 0 || img.height() == 0 {
        return Err(AugError::EmptyImage);
    }
    Ok(img)
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

/// Samples and applies the transforms for copy `index` of a source.
pub fn make_copy(
    source: &RgbImage,
    source_id: &str,
    index: u32,
    master_seed: u64,
    plan: &CorpusPlan,
    assets: &Assets,
) -> Result<(AugRecord, RgbImage)> {
    let seed = copy_seed(master_seed, source_id, index);
    let mut rng = stream(seed);
    let ctx = SampleContext {
        ranges: &plan.policy.ranges,
        assets,
        source_id,
        output_size: plan.output_size,
    };
    let mut cur = source.clone();
    let mut boxes = Vec::new();
    let mut transforms = Vec::new();
    for kind in sample_kinds(&mut rng, &plan.policy) {
        let t = sample_transform(kind, &mut rng, cur.dimensions(), &ctx)?;
        let step = apply_transform(&cur, &t, assets)?;
        boxes = map_boxes(&t, &boxes, cur.dimensions(), step.image.dimensions())?;
        boxes.extend(step.overlay_box);
        cur = step.image;
        transforms.push(t);
    }
    let record = AugRecord {
        source_id: source_id.to_string(),
        copy_id: copy_id(source_id, index),
        seed,
        transforms,
        overlay_boxes: boxes,
    };
    Ok((record, cur))
}

/// Rebuilds a copy from its source and recorded transforms.
pub fn replay(record: &AugRecord, source: &RgbImage, assets: &Assets) -> Result<RgbImage> {
    Ok(crate::ops::apply_all(source, &record.transforms, assets)?.0)
}

/// Assets for a run: usable sources as backgrounds plus the emoji set.
pub fn build_assets(sources: &[(String, PathBuf)], plan: &CorpusPlan) -> Result<Assets> {
    let mut assets = Assets::new();
    for (id, path) in sources {
        assets.add_source_path(id.clone(), path.clone());
    }
    if let Some(dir) = &plan.policy.emoji_dir {
        assets.load_emoji_dir(dir)?;
    }
    Ok(assets)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Generates the corpus under `out_dir`. `threads == 0` uses all cores;
/// the output does not depend on the thread count.
pub fn generate_corpus(
    src_dir: &Path,
    out_dir: &Path,
    plan: &CorpusPlan,
    master_seed: u64,
    threads: usize,
) -> Result<Manifest> {
    plan.validate()?;
    let selected: Vec<(String, PathBuf)> = discover_sources(src_dir)?
        .into_iter()
        .step_by(plan.source_stride)
        .collect();
    let copies_dir = out_dir.join("copies");
    std::fs::create_dir_all(&copies_dir)?;

    let records = copydesc_core::pool::with_threads(threads, || -> Result<Vec<AugRecord>> {
        let loaded: Vec<Option<(String, PathBuf, RgbImage)>> = selected
            .par_iter()
            .map(|(id, path)| match load_source(path) {
                Ok(img) => Some((id.clone(), path.clone(), img)),
                Err(e) => {
                    warn!("event=skip_source id={id} path={:?} error={:?}", path, e.to_string());
                    None
                }
            })
            .collect();
        let usable: Vec<(String, PathBuf, RgbImage)> = loaded.into_iter().flatten().collect();
        if usable.is_empty() {
            return Err(AugError::NoSources);
        }
        let paths: Vec<(String, PathBuf)> = usable.iter().map(|(i, p, _)| (i.clone(), p.clone())).collect();
        let assets = build_assets(&paths, plan)?;

        let per_source: Vec<Vec<AugRecord>> = usable
            .par_iter()
            .map(|(id, _, img)| {
                (0..plan.copies_per_source)
                    .map(|index| {
                        let (record, copy) = make_copy(img, id, index, master_seed, plan, &assets)?;
                        write_atomic(&copies_dir.join(format!("{}.png", record.copy_id)), &encode_png(&copy)?)?;
                        Ok(record)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut records: Vec<AugRecord> = per_source.into_iter().flatten().collect();
        records.sort_by(|a, b| a.copy_id.cmp(&b.copy_id));
        Ok(records)
    })??;

    let manifest = Manifest {
        master_seed,
        plan: plan.clone(),
        records,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_atomic(&out_dir.join("manifest.json"), &json)?;

    let truth_path = out_dir.join("truth.csv");
    let tmp = truth_path.with_extension("partial");
    write_truth(&manifest.truth()?, BufWriter::new(File::create(&tmp)?))?;
    std::fs::rename(&tmp, &truth_path)?;

    emit_detection_labels(&manifest, &out_dir.join("labels"))?;
    Ok(manifest)
}
