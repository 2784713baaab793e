//! Multi-scale descriptor fusion.
//!
//! Each per-scale vector is L2-normalized, the normalized vectors are
//! averaged across scales, and the mean is L2-normalized again.

use crate::descriptor::{DescriptorSet, MAX_FINAL_DIM};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionConfig {
    pub scale_count: usize,
}

impl Default for FusionConfig {
    /// Four test scales: 200, 256, 320 and 400 px.
    fn default() -> Self {
        Self { scale_count: 4 }
    }
}

/// Fuses per-scale sets that share role, dimension and id order.
pub fn fuse_multiscale<T: Scalar>(per_scale: &[DescriptorSet<T>]) -> Result<DescriptorSet<T>> {
    let first = per_scale.first().ok_or(Error::Empty("scale list"))?;
    if first.dim() > MAX_FINAL_DIM {
        return Err(Error::DimTooLarge {
            dim: first.dim(),
            max: MAX_FINAL_DIM,
        });
    }
    for (scale, set) in per_scale.iter().enumerate().skip(1) {
        if set.role() != first.role() {
            return Err(Error::RoleMismatch {
                expected: first.role(),
                found: set.role(),
            });
        }
        if set.dim() != first.dim() {
            return Err(Error::DimMismatch {
                expected: first.dim(),
                found: set.dim(),
            });
        }
        if set.len() != first.len() {
            return Err(Error::DimMismatch {
                expected: first.len(),
                found: set.len(),
            });
        }
        if let Some(position) = (0..set.len()).find(|&i| set.id(i) != first.id(i)) {
            return Err(Error::IdMismatch {
                scale,
                position,
                expected: first.id(position).to_owned(),
                found: set.id(position).to_owned(),
            });
        }
    }

    let dim = first.dim();
    let scales = per_scale.len() as f64;
    let mut acc = vec![0.0f64; dim];
    first.map_rows(first.role(), |row, id, _| {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for set in per_scale {
            let v = set.vector(row);
            let norm = v.iter().map(|x| x.widen() * x.widen()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroVector(Some(id.to_owned())));
            }
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x.widen() / norm;
            }
        }
        let mean_norm = acc.iter().map(|a| (a / scales).powi(2)).sum::<f64>().sqrt();
        if mean_norm == 0.0 || !mean_norm.is_finite() {
            return Err(Error::ZeroVector(Some(id.to_owned())));
        }
        Ok(acc
            .iter()
            .map(|a| T::narrow(a / scales / mean_norm))
            .collect())
    })
}
