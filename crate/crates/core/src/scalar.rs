use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Numeric type carried by event attributes and used for all predicate
/// arithmetic, aggregates and correlations.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Lossy conversion from a literal; literals are parsed as `f64` first.
    fn from_literal(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Send + Sync + 'static
{
}
