use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{sq_dist_f64, Scalar};

/// Margin used when none is configured.
pub const DEFAULT_MARGIN: f64 = 0.3;

/// Features with class labels for batch-hard mining.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch<T> {
    features: Vec<Vec<T>>,
    labels: Vec<u64>,
    margin: f64,
}

impl<T: Scalar> LabeledBatch<T> {
    /// Requires equal lengths, a shared feature dimension, at least two
    /// classes, and at least two samples per class.
    pub fn new(features: Vec<Vec<T>>, labels: Vec<u64>, margin: f64) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimMismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(Error::InvalidParam(format!("margin must be >= 0, got {margin}")));
        }
        let dim = features.first().map(Vec::len).ok_or(Error::Empty("batch"))?;
        if let Some(f) = features.iter().find(|f| f.len() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: f.len(),
            });
        }
        if features.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(None));
        }
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for l in &labels {
            *counts.entry(*l).or_default() += 1;
        }
        if counts.len() < 2 {
            return Err(Error::SingleClass);
        }
        let mut small: Vec<_> = counts.into_iter().filter(|(_, c)| *c < 2).collect();
        small.sort_unstable();
        if let Some((label, count)) = small.first() {
            return Err(Error::ClassTooSmall {
                label: *label,
                count: *count,
            });
        }
        Ok(Self {
            features,
            labels,
            margin,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }
}

/// Mean over anchors of `max(0, margin + hardest_positive - hardest_negative)`
/// with Euclidean distances.
pub fn batch_hard_triplet<T: Scalar>(batch: &LabeledBatch<T>) -> f64 {
    let n = batch.len();
    let mut total = 0.0;
    for a in 0..n {
        let mut hardest_pos = f64::NEG_INFINITY;
        let mut hardest_neg = f64::INFINITY;
        for j in 0..n {
            if j == a {
                continue;
            }
            let d = sq_dist_f64(&batch.features[a], &batch.features[j]).sqrt();
            if batch.labels[j] == batch.labels[a] {
                hardest_pos = hardest_pos.max(d);
            } else {
                hardest_neg = hardest_neg.min(d);
            }
        }
        total += (batch.margin + hardest_pos - hardest_neg).max(0.0);
    }
    total / n as f64
}
