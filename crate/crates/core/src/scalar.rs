use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Storage scalar for descriptor components: `f32` or `f64`.
///
/// Reductions (dot products, norms, means) are carried out in `f64`
/// regardless of the storage type and cast back on output.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Widen to the accumulation type.
    #[inline]
    fn widen(self) -> f64 {
        // Float -> f64 never fails for f32/f64.
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Narrow an accumulated value back to storage precision.
    #[inline]
    fn narrow(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[inline]
pub(crate) fn dot_f64<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.widen() * y.widen()).sum()
}

#[inline]
pub(crate) fn sq_norm_f64<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.widen() * x.widen()).sum()
}

#[inline]
pub(crate) fn sq_dist_f64<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.widen() - y.widen();
            d * d
        })
        .sum()
}
