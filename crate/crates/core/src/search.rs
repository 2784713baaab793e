//! Exact brute-force k-nearest-neighbor matching under Euclidean distance.
//!
//! Distances use the expansion `‖q‖² + ‖r‖² − 2⟨q, r⟩` with precomputed
//! norms; tiny negative values from cancellation are clamped to zero before
//! the square root. Every pair's inner product is accumulated in a fixed
//! order, so results do not depend on blocking or worker count.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{euclidean_distance, DescriptorSet};
use crate::error::{Error, Result};
use crate::pool::with_threads;
use crate::scalar::{dot_f64, sq_norm_f64, Scalar};

/// Largest distance matrix built without `force`.
pub const DISTANCE_MATRIX_GUARD: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCandidate {
    pub query_id: String,
    pub reference_id: String,
    /// Euclidean distance; lower is a better match.
    pub score: f64,
}

impl MatchCandidate {
    pub fn new(query_id: impl Into<String>, reference_id: impl Into<String>, score: f64) -> Self {
        Self {
            query_id: query_id.into(),
            reference_id: reference_id.into(),
            score,
        }
    }
}

/// Candidates grouped by query (in query-set order), each group sorted
/// ascending by score with ties broken by reference id.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    k: usize,
    candidates: Vec<MatchCandidate>,
}

impl CandidateList {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn candidates(&self) -> &[MatchCandidate] {
        &self.candidates
    }

    pub fn into_vec(self) -> Vec<MatchCandidate> {
        self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub k: usize,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    pub query_block: usize,
    pub reference_block: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            k: 10,
            threads: 0,
            query_block: 32,
            reference_block: 1024,
        }
    }
}

impl SearchOptions {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

struct Hit<'a> {
    score: f64,
    id: &'a str,
}

impl Hit<'_> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| self.id.cmp(other.id))
    }
}

impl PartialEq for Hit<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Hit<'_> {}

impl PartialOrd for Hit<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Hit<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

#[inline]
fn expanded_distance(q_sq: f64, r_sq: f64, dot: f64) -> f64 {
    (q_sq + r_sq - 2.0 * dot).max(0.0).sqrt()
}

/// Exact k smallest distances from each query to the reference set.
pub fn knn_search<T: Scalar>(
    queries: &DescriptorSet<T>,
    references: &DescriptorSet<T>,
    opts: &SearchOptions,
) -> Result<CandidateList> {
    if opts.k == 0 {
        return Err(Error::InvalidParam("k must be at least 1".into()));
    }
    if references.is_empty() {
        return Err(Error::Empty("reference set"));
    }
    if queries.dim() != references.dim() {
        return Err(Error::DimMismatch {
            expected: queries.dim(),
            found: references.dim(),
        });
    }
    let k = opts.k.min(references.len());
    let q_block = opts.query_block.max(1);
    let r_block = opts.reference_block.max(1);
    let ref_sq: Vec<f64> = (0..references.len())
        .map(|j| sq_norm_f64(references.vector(j)))
        .collect();

    let per_block: Vec<Vec<MatchCandidate>> = with_threads(opts.threads, || {
        let starts: Vec<usize> = (0..queries.len()).step_by(q_block).collect();
        starts
            .into_par_iter()
            .map(|start| {
                let end = (start + q_block).min(queries.len());
                let q_sq: Vec<f64> = (start..end).map(|i| sq_norm_f64(queries.vector(i))).collect();
                let mut heaps: Vec<BinaryHeap<Hit<'_>>> =
                    (start..end).map(|_| BinaryHeap::with_capacity(k + 1)).collect();
                for r0 in (0..references.len()).step_by(r_block) {
                    let r1 = (r0 + r_block).min(references.len());
                    for (qi, heap) in heaps.iter_mut().enumerate() {
                        let q = queries.vector(start + qi);
                        for j in r0..r1 {
                            let hit = Hit {
                                score: expanded_distance(q_sq[qi], ref_sq[j], dot_f64(q, references.vector(j))),
                                id: references.id(j),
                            };
                            if heap.len() < k {
                                heap.push(hit);
                            } else if heap.peek().is_some_and(|worst| hit < *worst) {
                                heap.pop();
                                heap.push(hit);
                            }
                        }
                    }
                }
                let mut out = Vec::with_capacity((end - start) * k);
                for (qi, heap) in heaps.into_iter().enumerate() {
                    let qid = queries.id(start + qi);
                    out.extend(
                        heap.into_sorted_vec()
                            .into_iter()
                            .map(|h| MatchCandidate::new(qid, h.id, h.score)),
                    );
                }
                out
            })
            .collect()
    })?;

    Ok(CandidateList {
        k: opts.k,
        candidates: per_block.into_iter().flatten().collect(),
    })
}

/// Dense row-major matrix of query-to-reference distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// Entry `(i, j)` is `euclidean_distance(q_i, r_j)`. Refuses more than
/// [`DISTANCE_MATRIX_GUARD`] entries unless `force` is set.
pub fn distance_matrix<T: Scalar>(
    queries: &DescriptorSet<T>,
    references: &DescriptorSet<T>,
    force: bool,
) -> Result<DistanceMatrix> {
    if queries.is_empty() {
        return Err(Error::Empty("query set"));
    }
    if references.is_empty() {
        return Err(Error::Empty("reference set"));
    }
    if queries.dim() != references.dim() {
        return Err(Error::DimMismatch {
            expected: queries.dim(),
            found: references.dim(),
        });
    }
    let entries = queries.len() as u128 * references.len() as u128;
    if entries > DISTANCE_MATRIX_GUARD && !force {
        return Err(Error::SizeGuard {
            entries,
            limit: DISTANCE_MATRIX_GUARD,
        });
    }
    let mut values = Vec::with_capacity(entries as usize);
    for (_, q) in queries.iter() {
        for (_, r) in references.iter() {
            values.push(euclidean_distance(q, r)?);
        }
    }
    Ok(DistanceMatrix {
        rows: queries.len(),
        cols: references.len(),
        values,
    })
}
