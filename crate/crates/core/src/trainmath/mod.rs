//! Training-time numeric kernels: GeM pooling, the warmup/cosine learning
//! rate ratio, batch-hard triplet loss and soft cross-entropy.

mod gem;
mod schedule;
mod triplet;
mod xent;

pub use gem::{gem_pool, FeatureMap, GemParams};
pub use schedule::{lr_ratio, ScheduleConfig};
pub use triplet::{batch_hard_triplet, LabeledBatch, DEFAULT_MARGIN};
pub use xent::{entropy, log_softmax, soft_cross_entropy, PROB_SUM_TOLERANCE};
