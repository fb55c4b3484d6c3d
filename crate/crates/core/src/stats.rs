//! Numeric helpers used by predicates: correlation and aggregates.

use crate::error::StatsError;
use crate::scalar::Scalar;

/// Sample Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson<S: Scalar>(x: &[S], y: &[S]) -> Result<S, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort(x.len()));
    }
    let n = S::from_usize(x.len()).unwrap_or_else(S::nan);
    let mx = x.iter().fold(S::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(S::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx, mut syy) = (S::zero(), S::zero(), S::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= S::zero() || syy <= S::zero() {
        return Err(StatsError::ZeroVariance);
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-S::one()).min(S::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFn {
    Avg,
    Sum,
    Min,
    Max,
    Count,
}

impl AggFn {
    pub fn name(self) -> &'static str {
        match self {
            AggFn::Avg => "AVG",
            AggFn::Sum => "SUM",
            AggFn::Min => "MIN",
            AggFn::Max => "MAX",
            AggFn::Count => "COUNT",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AVG" => Some(AggFn::Avg),
            "SUM" => Some(AggFn::Sum),
            "MIN" => Some(AggFn::Min),
            "MAX" => Some(AggFn::Max),
            "COUNT" => Some(AggFn::Count),
            _ => None,
        }
    }

    /// `None` for an empty input (except COUNT).
    pub fn apply<S: Scalar>(self, xs: &[S]) -> Option<S> {
        if xs.is_empty() {
            return match self {
                AggFn::Count | AggFn::Sum => Some(S::zero()),
                _ => None,
            };
        }
        let sum = || xs.iter().fold(S::zero(), |a, &v| a + v);
        Some(match self {
            AggFn::Sum => sum(),
            AggFn::Avg => sum() / S::from_usize(xs.len())?,
            AggFn::Min => xs.iter().copied().fold(S::infinity(), S::min),
            AggFn::Max => xs.iter().copied().fold(S::neg_infinity(), S::max),
            AggFn::Count => S::from_usize(xs.len())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single-pass textbook form, algebraically distinct from the centered form.
    fn pearson_raw_sums(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|a| a * a).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn perfect_correlations() {
        assert!((pearson::<f64>(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson::<f64>(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_raw_sum_formula() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 4.0];
        let expected = pearson_raw_sums(&x, &y);
        assert!((expected - 0.981_980_506_061_965_7).abs() < 1e-12);
        assert!((pearson(&x, &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let r: f32 = pearson(&[1.0f32, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.98198).abs() < 1e-4);
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
        assert_eq!(pearson(&[1.0], &[1.0]), Err(StatsError::TooShort(1)));
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ZeroVariance)
        );
    }

    #[test]
    fn aggregates() {
        let xs = [4.0, 1.0, 7.0];
        assert_eq!(AggFn::Avg.apply(&xs), Some(4.0));
        assert_eq!(AggFn::Sum.apply(&xs), Some(12.0));
        assert_eq!(AggFn::Min.apply(&xs), Some(1.0));
        assert_eq!(AggFn::Max.apply(&xs), Some(7.0));
        assert_eq!(AggFn::Count.apply(&xs), Some(3.0));
        assert_eq!(AggFn::Avg.apply::<f64>(&[]), None);
    }
}
