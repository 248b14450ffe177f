use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Scalar type the whole library is generic over. Implemented for `f32`
/// and `f64`; the simulation harness pins `f64` via the crate-root aliases.
pub trait Scalar:
    Float + FromPrimitive + AddAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Shorthand for lossy conversion of literals and config values.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value not representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + AddAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}
