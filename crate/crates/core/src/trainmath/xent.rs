use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Allowed deviation of a target distribution's sum from 1.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// Max-shifted log-softmax, in `f64`.
pub fn log_softmax<T: Scalar>(logits: &[T]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Empty("logits"));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(None));
    }
    let max = logits.iter().map(|x| x.widen()).fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|x| (x.widen() - max).exp()).sum::<f64>().ln();
    Ok(logits.iter().map(|x| x.widen() - lse).collect())
}

fn check_distribution<T: Scalar>(p: &[T]) -> Result<()> {
    if p.iter().any(|x| !(x.widen() >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParam("target probabilities must be finite and >= 0".into()));
    }
    let sum: f64 = p.iter().map(|x| x.widen()).sum();
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// Shannon entropy in nats, with `0 * ln 0 = 0`.
pub fn entropy<T: Scalar>(p: &[T]) -> Result<f64> {
    check_distribution(p)?;
    Ok(-p
        .iter()
        .map(|x| x.widen())
        .filter(|x| *x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>())
}

/// `-sum_i target_i * log_softmax(logits)_i`.
pub fn soft_cross_entropy<T: Scalar>(logits: &[T], target: &[T]) -> Result<f64> {
    if logits.len() != target.len() {
        return Err(Error::DimMismatch {
            expected: logits.len(),
            found: target.len(),
        });
    }
    check_distribution(target)?;
    let ls = log_softmax(logits)?;
    Ok(-target
        .iter()
        .zip(&ls)
        .filter(|(t, _)| t.widen() > 0.0)
        .map(|(t, l)| t.widen() * l)
        .sum::<f64>())
}
