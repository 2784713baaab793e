//! Copy-detection scoring over a pooled candidate-pair list.
//!
//! `micro_ap` ranks every emitted pair from every query in one global list
//! (ascending distance; ties broken by query id then reference id) and
//! computes non-interpolated average precision against the total number of
//! ground-truth pairs. Pairs emitted for distractor queries count as false
//! positives wherever they land in the ranking.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::MatchCandidate;

/// True (query, reference) pairs. Each query has at most one source
/// reference; queries absent from the map are distractors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pairs: HashMap<String, String>,
}

impl GroundTruth {
    pub fn from_pairs<I, Q, R>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Q, R)>,
        Q: Into<String>,
        R: Into<String>,
    {
        let mut map = HashMap::new();
        for (q, r) in pairs {
            let q = q.into();
            if map.contains_key(&q) {
                return Err(Error::DuplicateTruthQuery(q));
            }
            map.insert(q, r.into());
        }
        Ok(Self { pairs: map })
    }

    /// Number of ground-truth pairs, equal to the number of positive queries.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn reference_for(&self, query_id: &str) -> Option<&str> {
        self.pairs.get(query_id).map(String::as_str)
    }

    pub fn contains(&self, query_id: &str, reference_id: &str) -> bool {
        self.reference_for(query_id) == Some(reference_id)
    }

    /// Pairs sorted by query id.
    pub fn sorted_pairs(&self) -> Vec<(&str, &str)> {
        let mut v: Vec<_> = self.pairs.iter().map(|(q, r)| (q.as_str(), r.as_str())).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub micro_ap: f64,
    pub recall_at_p90: f64,
    pub recall_at_rank: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pr_curve: Option<Vec<PrPoint>>,
}

fn check_inputs(candidates: &[MatchCandidate], truth: &GroundTruth) -> Result<()> {
    if truth.is_empty() {
        return Err(Error::Empty("ground truth"));
    }
    let mut seen = HashSet::with_capacity(candidates.len());
    for c in candidates {
        if !c.score.is_finite() {
            return Err(Error::NonFinite(Some(format!("{}/{}", c.query_id, c.reference_id))));
        }
        if !seen.insert((c.query_id.as_str(), c.reference_id.as_str())) {
            return Err(Error::DuplicateCandidate(c.query_id.clone(), c.reference_id.clone()));
        }
    }
    Ok(())
}

/// Global ranking order: score, then query id, then reference id.
pub fn global_order(candidates: &[MatchCandidate]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&candidates[a], &candidates[b]);
        x.score
            .total_cmp(&y.score)
            .then_with(|| x.query_id.cmp(&y.query_id))
            .then_with(|| x.reference_id.cmp(&y.reference_id))
    });
    order
}

/// Hit flags along the global ranking.
fn ranked_hits(candidates: &[MatchCandidate], truth: &GroundTruth) -> Vec<bool> {
    global_order(candidates)
        .into_iter()
        .map(|i| truth.contains(&candidates[i].query_id, &candidates[i].reference_id))
        .collect()
}

pub fn micro_ap(candidates: &[MatchCandidate], truth: &GroundTruth) -> Result<f64> {
    check_inputs(candidates, truth)?;
    let mut tp = 0u64;
    let mut sum = 0.0f64;
    for (rank, hit) in ranked_hits(candidates, truth).into_iter().enumerate() {
        if hit {
            tp += 1;
            sum += tp as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / truth.len() as f64)
}

/// Largest recall over all prefixes of the global ranking whose precision
/// is at least `p`; zero when no prefix qualifies.
pub fn recall_at_precision(candidates: &[MatchCandidate], truth: &GroundTruth, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam(format!("precision level {p} outside (0, 1]")));
    }
    check_inputs(candidates, truth)?;
    let mut tp = 0u64;
    let mut best = 0.0f64;
    for (rank, hit) in ranked_hits(candidates, truth).into_iter().enumerate() {
        tp += u64::from(hit);
        if tp as f64 / (rank + 1) as f64 >= p {
            best = best.max(tp as f64 / truth.len() as f64);
        }
    }
    Ok(best)
}

/// Fraction of ground-truth queries whose true reference is among that
/// query's `k` best-scored candidates (ties by reference id).
pub fn recall_at_rank(candidates: &[MatchCandidate], truth: &GroundTruth, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParam("rank cutoff must be at least 1".into()));
    }
    check_inputs(candidates, truth)?;
    let mut per_query: HashMap<&str, Vec<&MatchCandidate>> = HashMap::new();
    for c in candidates {
        per_query.entry(c.query_id.as_str()).or_default().push(c);
    }
    let mut found = 0usize;
    for (query, reference) in truth.sorted_pairs() {
        let Some(list) = per_query.get_mut(query) else {
            continue;
        };
        list.sort_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then_with(|| a.reference_id.cmp(&b.reference_id))
        });
        if list.iter().take(k).any(|c| c.reference_id == reference) {
            found += 1;
        }
    }
    Ok(found as f64 / truth.len() as f64)
}

/// (recall, precision) after each position of the global ranking.
pub fn pr_curve(candidates: &[MatchCandidate], truth: &GroundTruth) -> Result<Vec<PrPoint>> {
    check_inputs(candidates, truth)?;
    let mut tp = 0u64;
    Ok(ranked_hits(candidates, truth)
        .into_iter()
        .enumerate()
        .map(|(rank, hit)| {
            tp += u64::from(hit);
            PrPoint {
                recall: tp as f64 / truth.len() as f64,
                precision: tp as f64 / (rank + 1) as f64,
            }
        })
        .collect())
}

/// Full report: micro-AP, recall at precision 0.9, recall at each rank
/// cutoff, and optionally the PR curve.
pub fn evaluate(
    candidates: &[MatchCandidate],
    truth: &GroundTruth,
    ranks: &[usize],
    with_curve: bool,
) -> Result<EvalReport> {
    let mut recall = BTreeMap::new();
    for &k in ranks {
        recall.insert(k, recall_at_rank(candidates, truth, k)?);
    }
    Ok(EvalReport {
        micro_ap: micro_ap(candidates, truth)?,
        recall_at_p90: recall_at_precision(candidates, truth, 0.9)?,
        recall_at_rank: recall,
        pr_curve: if with_curve {
            Some(pr_curve(candidates, truth)?)
        } else {
            None
        },
    })
}
