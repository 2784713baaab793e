use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-channel activations of one image, spatial positions flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    channels: Vec<Vec<T>>,
}

impl<T: Scalar> FeatureMap<T> {
    /// Validates non-negative activations and equal, non-empty channel sizes.
    pub fn new(channels: Vec<Vec<T>>) -> Result<Self> {
        let size = channels.first().map(Vec::len).ok_or(Error::Empty("feature map"))?;
        for (k, ch) in channels.iter().enumerate() {
            if ch.is_empty() {
                return Err(Error::Empty("feature channel"));
            }
            if ch.len() != size {
                return Err(Error::DimMismatch {
                    expected: size,
                    found: ch.len(),
                });
            }
            if let Some(v) = ch.iter().find(|v| !(v.widen() >= 0.0) || !v.is_finite()) {
                return Err(Error::NegativeActivation {
                    channel: k,
                    value: v.widen(),
                });
            }
        }
        Ok(Self { channels })
    }

    /// Builds a map from a channel-major `[K, H*W]` buffer.
    pub fn from_flat(channels: usize, data: &[T]) -> Result<Self> {
        if channels == 0 || !data.len().is_multiple_of(channels) {
            return Err(Error::DimMismatch {
                expected: channels,
                found: data.len(),
            });
        }
        let per = data.len() / channels;
        Self::new(data.chunks(per.max(1)).map(<[T]>::to_vec).collect())
    }

    pub fn channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, k: usize) -> &[T] {
        &self.channels[k]
    }
}

/// Per-channel pooling exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct GemParams<T> {
    pub p: Vec<T>,
}

impl<T: Scalar> GemParams<T> {
    pub const INITIAL_P: f64 = 3.0;

    /// Every channel at the initial exponent of 3.
    pub fn initial(channels: usize) -> Self {
        Self::uniform(channels, T::narrow(Self::INITIAL_P))
    }

    pub fn uniform(channels: usize, p: T) -> Self {
        Self { p: vec![p; channels] }
    }
}

/// Generalized mean per channel: `(mean(x^p))^(1/p)`.
///
/// Evaluated as `max * (mean((x/max)^p))^(1/p)` so large exponents do not
/// overflow.
pub fn gem_pool<T: Scalar>(fm: &FeatureMap<T>, params: &GemParams<T>) -> Result<Vec<T>> {
    if params.p.len() != fm.channels() {
        return Err(Error::DimMismatch {
            expected: fm.channels(),
            found: params.p.len(),
        });
    }
    fm.channels
        .iter()
        .zip(&params.p)
        .map(|(xs, p)| {
            let p = p.widen();
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidParam(format!("pooling exponent must be >= 1, got {p}")));
            }
            Ok(T::narrow(power_mean(xs, p)))
        })
        .collect()
}

fn power_mean<T: Scalar>(xs: &[T], p: f64) -> f64 {
    let max = xs.iter().map(|x| x.widen()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let n = xs.len() as f64;
    if p == 1.0 {
        return xs.iter().map(|x| x.widen()).sum::<f64>() / n;
    }
    let mean = xs.iter().map(|x| (x.widen() / max).powf(p)).sum::<f64>() / n;
    max * mean.powf(1.0 / p)
}
