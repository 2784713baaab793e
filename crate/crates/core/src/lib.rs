//! Copy-detection descriptor pipeline: descriptor fusion, query stretching,
//! exact k-NN matching, and micro-AP scoring, plus the training-time numeric
//! kernels used to produce the descriptors.
//!
//! Vector math is generic over [`Scalar`] (`f32` or `f64`); reductions are
//! accumulated in `f64`. The aliases below name the common instantiations.

pub mod descriptor;
pub mod error;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod pairs;
pub mod pool;
pub mod scalar;
pub mod search;
pub mod stretch;
pub mod trainmath;

mod total;

pub use descriptor::{euclidean_distance, inner_product, l2_normalize, Descriptor, DescriptorSet, Role, MAX_FINAL_DIM};
pub use error::{Category, Error, FormatError, Result};
pub use fusion::{fuse_multiscale, FusionConfig};
pub use metrics::{evaluate, micro_ap, recall_at_precision, recall_at_rank, EvalReport, GroundTruth};
pub use scalar::Scalar;
pub use search::{distance_matrix, knn_search, CandidateList, MatchCandidate, SearchOptions};
pub use stretch::{stretch, stretched_score, StretchConfig, StretchReport};

/// Descriptor stored in single precision, the on-disk format.
pub type Descriptor32 = Descriptor<f32>;
pub type Descriptor64 = Descriptor<f64>;
pub type DescriptorSet32 = DescriptorSet<f32>;
pub type DescriptorSet64 = DescriptorSet<f64>;
pub type FeatureMap32 = trainmath::FeatureMap<f32>;
pub type FeatureMap64 = trainmath::FeatureMap<f64>;
pub type LabeledBatch32 = trainmath::LabeledBatch<f32>;
pub type LabeledBatch64 = trainmath::LabeledBatch<f64>;
