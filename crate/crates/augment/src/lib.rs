//! Seeded image augmentation for building copy-detection corpora.
//!
//! Each source image yields a fixed number of edited copies. A copy applies
//! a random subset of transform kinds in canonical order and ends with a
//! resize to the output size. All randomness flows from a per-copy seed
//! derived from `(master_seed, source_id, copy_index)`, so a corpus is
//! reproducible byte for byte regardless of worker count.

pub mod assets;
pub mod config;
pub mod corpus;
pub mod error;
pub mod font;
pub mod geometry;
pub mod labels;
pub mod ops;
pub mod rng;
pub mod transform;

pub use assets::Assets;
pub use config::{AugConfig, CorpusPlan, Ranges};
pub use corpus::{generate_corpus, make_copy, replay, AugRecord, Manifest};
pub use error::{AugError, Result};
pub use geometry::{BBox, Rect};
pub use labels::emit_detection_labels;
pub use ops::{apply_all, apply_transform, map_boxes, Applied};
pub use transform::{Background, Transform, TransformKind};
