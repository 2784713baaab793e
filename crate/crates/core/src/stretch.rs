//! Descriptor stretching.
//!
//! Each query vector `q` is replaced by `alpha * s_n * q`, where `s_n` is
//! the mean of the `n` largest inner products between `q` and the training
//! set. Training and reference descriptors are left untouched, and the
//! stretched vectors are not re-normalized.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{euclidean_distance, l2_norm, DescriptorSet, Role};
use crate::error::{Error, Result};
use crate::pool::with_threads;
use crate::scalar::{dot_f64, Scalar};
use crate::total::TotalF64;

/// Allowed deviation of an input vector's norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchConfig {
    pub alpha: f64,
    pub n: usize,
}

impl Default for StretchConfig {
    fn default() -> Self {
        Self { alpha: 2.5, n: 5 }
    }
}

impl StretchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParam(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParam("n must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryStretch {
    pub id: String,
    pub s_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub alpha: f64,
    pub n: usize,
    pub per_query: Vec<QueryStretch>,
    pub summary: Summary,
    /// Queries with `s_n <= 0`: their stretched vector collapsed to zero or
    /// flipped direction.
    pub flagged: Vec<String>,
}

/// Mean of the `n` largest inner products of `query` against every
/// training vector. Exact: a bounded min-heap over a full scan.
pub fn mean_top_n<T: Scalar>(query: &[T], training: &DescriptorSet<T>, n: usize) -> f64 {
    let mut heap: BinaryHeap<Reverse<TotalF64>> = BinaryHeap::with_capacity(n + 1);
    for (_, t) in training.iter() {
        let s = TotalF64(dot_f64(query, t));
        if heap.len() < n {
            heap.push(Reverse(s));
        } else if heap.peek().is_some_and(|min| s > min.0) {
            heap.pop();
            heap.push(Reverse(s));
        }
    }
    // Fixed summation order so the mean does not depend on heap layout.
    let mut top: Vec<f64> = heap.into_iter().map(|r| r.0 .0).collect();
    top.sort_by(|a, b| b.total_cmp(a));
    top.iter().sum::<f64>() / top.len() as f64
}

fn check_unit<T: Scalar>(set: &DescriptorSet<T>) -> Result<()> {
    for (id, v) in set.iter() {
        let norm = l2_norm(v);
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::NotUnitNorm {
                id: id.to_owned(),
                norm,
            });
        }
    }
    Ok(())
}

/// Stretches every query. `threads == 0` uses the global pool; the result
/// is identical for any worker count.
pub fn stretch<T: Scalar>(
    queries: &DescriptorSet<T>,
    training: &DescriptorSet<T>,
    cfg: &StretchConfig,
    threads: usize,
) -> Result<(DescriptorSet<T>, StretchReport)> {
    cfg.validate()?;
    if queries.role() != Role::Query {
        return Err(Error::RoleMismatch {
            expected: Role::Query,
            found: queries.role(),
        });
    }
    if training.role() != Role::Training {
        return Err(Error::RoleMismatch {
            expected: Role::Training,
            found: training.role(),
        });
    }
    if queries.dim() != training.dim() {
        return Err(Error::DimMismatch {
            expected: queries.dim(),
            found: training.dim(),
        });
    }
    if training.len() < cfg.n {
        return Err(Error::InsufficientTraining {
            have: training.len(),
            need: cfg.n,
        });
    }
    check_unit(queries)?;
    check_unit(training)?;

    let s_n: Vec<f64> = with_threads(threads, || {
        (0..queries.len())
            .into_par_iter()
            .map(|i| mean_top_n(queries.vector(i), training, cfg.n))
            .collect()
    })?;

    let out = queries.map_rows(Role::Query, |i, _, q| Ok(scale(q, cfg.alpha * s_n[i])))?;

    let per_query: Vec<QueryStretch> = queries
        .ids()
        .iter()
        .zip(&s_n)
        .map(|(id, s)| QueryStretch {
            id: id.clone(),
            s_n: *s,
        })
        .collect();
    let flagged = per_query
        .iter()
        .filter(|q| q.s_n <= 0.0)
        .map(|q| q.id.clone())
        .collect();
    let summary = if s_n.is_empty() {
        Summary {
            min: f64::NAN,
            mean: f64::NAN,
            max: f64::NAN,
        }
    } else {
        Summary {
            min: s_n.iter().copied().fold(f64::INFINITY, f64::min),
            mean: s_n.iter().sum::<f64>() / s_n.len() as f64,
            max: s_n.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    };
    Ok((
        out,
        StretchReport {
            alpha: cfg.alpha,
            n: cfg.n,
            per_query,
            summary,
            flagged,
        },
    ))
}

fn scale<T: Scalar>(v: &[T], factor: f64) -> Vec<T> {
    v.iter().map(|x| T::narrow(x.widen() * factor)).collect()
}

/// Distance between a stretched query and a reference.
pub fn stretched_score<T: Scalar>(stretched_query: &[T], reference: &[T]) -> Result<f64> {
    euclidean_distance(stretched_query, reference)
}
