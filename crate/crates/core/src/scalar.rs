//! Scalar abstractions shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, NumCast, Signed};

/// Floating point scalar used by the rate, theory and fitting code: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    fn from_count(n: u64) -> Self {
        <Self as NumCast>::from(n).expect("count representable")
    }

    /// Threshold below which products switch to log-space accumulation.
    fn underflow_guard() -> Self {
        let guard = Self::lit(1e-300);
        let floor = Self::min_positive_value() * Self::lit(1e6);
        if guard > floor {
            guard
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Probability arithmetic used by the distribution comparisons.
///
/// Implemented by the floats and by exact rationals such as
/// [`num_rational::Ratio<i64>`], so empirical pmfs can be handled exactly.
pub trait Probability: Num + Signed + PartialOrd + Copy + FromPrimitive + Debug {}

impl<T> Probability for T where T: Num + Signed + PartialOrd + Copy + FromPrimitive + Debug {}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Float> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Float> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let acc: CompensatedSum<f64> = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn underflow_guard_is_positive_for_both_widths() {
        assert_eq!(f64::underflow_guard(), 1e-300);
        assert!(f32::underflow_guard() > 0.0);
    }
}
