//! Floating-point scalar abstraction shared by every estimator.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the estimators are generic over: `f32` or `f64`.
///
/// Discrete atoms are identified by exact bit pattern, so every scalar
/// exposes a lossless integer key.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Bit pattern used to identify repeated atoms. `0.0` and `-0.0` map to
    /// the same key since they are at distance zero.
    fn atom_key(self) -> u64;

    /// Lossless-enough conversion from `f64` for constants and parsed input.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count representable")
    }
}

impl Scalar for f64 {
    fn atom_key(self) -> u64 {
        if self == 0.0 {
            0
        } else {
            self.to_bits()
        }
    }
}

impl Scalar for f32 {
    fn atom_key(self) -> u64 {
        if self == 0.0 {
            0
        } else {
            u64::from(self.to_bits())
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry = self.carry + ((self.sum - t) + v);
        } else {
            self.carry = self.carry + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated arithmetic mean; zero for an empty slice.
pub fn compensated_mean<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let acc: CompensatedSum<T> = values.iter().copied().collect();
    acc.total() / T::of_usize(values.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1e16_f64, 1.0, -1e16];
        values.extend(std::iter::repeat_n(1.0, 9));
        let acc: CompensatedSum<f64> = values.into_iter().collect();
        assert_eq!(acc.total(), 10.0);
    }

    #[test]
    fn signed_zero_shares_atom_key() {
        assert_eq!(0.0_f64.atom_key(), (-0.0_f64).atom_key());
        assert_ne!(1.0_f64.atom_key(), (-1.0_f64).atom_key());
        assert_eq!(0.0_f32.atom_key(), (-0.0_f32).atom_key());
    }
}
