//! Slow reference implementations used as test oracles. Nothing here calls
//! into the library's kernels.

#![allow(dead_code)]

use std::cmp::Ordering;

pub fn naive_distance(a: &[f32], b: &[f32]) -> f64 {
    let mut s = 0.0f64;
    for i in 0..a.len() {
        let d = a[i] as f64 - b[i] as f64;
        s += d * d;
    }
    s.sqrt()
}

pub fn naive_norm(a: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in a {
        s += x * x;
    }
    s.sqrt()
}

/// (query, reference, score) triples.
pub type Pair = (String, String, f64);

fn key_cmp(a: &Pair, b: &Pair) -> Ordering {
    a.2.total_cmp(&b.2)
        .then_with(|| a.0.cmp(&b.0))
        .then_with(|| a.1.cmp(&b.1))
}

fn is_true(p: &Pair, truth: &[(String, String)]) -> bool {
    truth.iter().any(|(q, r)| *q == p.0 && *r == p.1)
}

/// Pooled-ranking AP by enumeration: the precision at each true pair is the
/// share of true pairs among all pairs ranked at or before it. Terms are
/// summed in rank order so the result is comparable bit for bit.
pub fn pooled_ap(pairs: &[Pair], truth: &[(String, String)]) -> f64 {
    let hit: Vec<bool> = pairs.iter().map(|p| is_true(p, truth)).collect();
    let mut terms: Vec<(u64, f64)> = Vec::new();
    for (h, _) in pairs.iter().zip(&hit).filter(|(_, t)| **t) {
        let mut at_or_before = 0u64;
        let mut true_at_or_before = 0u64;
        for (p, t) in pairs.iter().zip(&hit) {
            if key_cmp(p, h) != Ordering::Greater {
                at_or_before += 1;
                if *t {
                    true_at_or_before += 1;
                }
            }
        }
        terms.push((at_or_before, true_at_or_before as f64 / at_or_before as f64));
    }
    terms.sort_by_key(|t| t.0);
    terms.iter().map(|t| t.1).sum::<f64>() / truth.len() as f64
}

/// Max recall over every prefix whose precision reaches `level`.
pub fn recall_at_precision(pairs: &[Pair], truth: &[(String, String)], level: f64) -> f64 {
    let hit: Vec<bool> = pairs.iter().map(|p| is_true(p, truth)).collect();
    let mut best = 0.0f64;
    for end in pairs {
        let mut n = 0u64;
        let mut tp = 0u64;
        for (p, t) in pairs.iter().zip(&hit) {
            if key_cmp(p, end) != Ordering::Greater {
                n += 1;
                if *t {
                    tp += 1;
                }
            }
        }
        if tp as f64 / n as f64 >= level {
            best = best.max(tp as f64 / truth.len() as f64);
        }
    }
    best
}

/// Per-query rank of the true reference, counted by enumeration.
pub fn recall_at_rank(pairs: &[Pair], truth: &[(String, String)], k: usize) -> f64 {
    let mut hits = 0usize;
    for (q, r) in truth {
        let Some(t) = pairs.iter().find(|p| p.0 == *q && p.1 == *r) else {
            continue;
        };
        let better = pairs
            .iter()
            .filter(|p| p.0 == *q)
            .filter(|p| p.2.total_cmp(&t.2).then_with(|| p.1.cmp(&t.1)) == Ordering::Less)
            .count();
        if better < k {
            hits += 1;
        }
    }
    hits as f64 / truth.len() as f64
}

/// Full distance matrix with naive loops, then a full sort per row.
/// Returns per query the k best (reference index, distance).
pub fn knn(queries: &[Vec<f32>], refs: &[Vec<f32>], ref_ids: &[String], k: usize) -> Vec<Vec<(usize, f64)>> {
    queries
        .iter()
        .map(|q| {
            let mut row: Vec<(usize, f64)> = refs.iter().enumerate().map(|(j, r)| (j, naive_distance(q, r))).collect();
            row.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| ref_ids[a.0].cmp(&ref_ids[b.0])));
            row.truncate(k);
            row
        })
        .collect()
}

/// Normalize each scale, average, normalize.
pub fn fuse(per_scale: &[Vec<f32>]) -> Vec<f64> {
    let dim = per_scale[0].len();
    let mut mean = vec![0.0f64; dim];
    for v in per_scale {
        let v: Vec<f64> = v.iter().map(|x| *x as f64).collect();
        let n = naive_norm(&v);
        for i in 0..dim {
            mean[i] += v[i] / n / per_scale.len() as f64;
        }
    }
    let n = naive_norm(&mean);
    mean.iter().map(|x| x / n).collect()
}

/// Enumerates every (anchor, positive, negative) triplet and keeps, per
/// anchor, the largest hinge.
pub fn batch_hard_triplet(features: &[Vec<f64>], labels: &[u64], margin: f64) -> f64 {
    let d = |i: usize, j: usize| {
        let mut s = 0.0;
        for t in 0..features[i].len() {
            s += (features[i][t] - features[j][t]).powi(2);
        }
        s.sqrt()
    };
    let n = features.len();
    let mut total = 0.0;
    for a in 0..n {
        let mut worst = 0.0f64;
        for p in 0..n {
            if p == a || labels[p] != labels[a] {
                continue;
            }
            for m in 0..n {
                if labels[m] == labels[a] {
                    continue;
                }
                worst = worst.max(margin + d(a, p) - d(a, m));
            }
        }
        total += worst;
    }
    total / n as f64
}

/// Unshifted softmax cross-entropy.
pub fn cross_entropy(logits: &[f64], target: &[f64]) -> f64 {
    let z: f64 = logits.iter().map(|x| x.exp()).sum();
    let mut ce = 0.0;
    for i in 0..logits.len() {
        if target[i] > 0.0 {
            ce -= target[i] * (logits[i].exp() / z).ln();
        }
    }
    ce
}

/// Direct power mean.
pub fn gem(xs: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    for x in xs {
        s += x.powf(p);
    }
    (s / xs.len() as f64).powf(1.0 / p)
}

/// Warmup/cosine schedule transcribed branch by branch for 5/10/25 epochs.
pub fn lr_ratio(epoch: f64) -> f64 {
    if epoch < 5.0 {
        0.99 * epoch / 5.0 + 0.01
    } else if epoch < 10.0 {
        1.0
    } else {
        0.5 * (((epoch - 10.0) / (25.0 - 10.0) * std::f64::consts::PI).cos() + 1.0)
    }
}
