use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the model is computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(floor, multiple * eps)`: a tolerance that is `floor` in double precision and
    /// degrades gracefully for `f32`.
    #[inline]
    fn tol(floor: f64, eps_multiple: f64) -> Self {
        Self::lit(floor).max(Self::epsilon() * Self::lit(eps_multiple))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
