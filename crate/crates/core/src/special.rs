//! Digamma function.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// ψ(x) for x > 0.
///
/// Shifts the argument above 6 with ψ(x) = ψ(x + 1) − 1/x, then sums the
/// asymptotic series through the x⁻¹² term. Absolute error is below 1e-12
/// for f64 and x ≥ 1.
pub fn digamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma undefined at {x}")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked<T: Scalar>(mut x: T) -> T {
    let six = T::of(6.0);
    let mut shift = T::zero();
    while x < six {
        shift = shift + x.recip();
        x = x + T::one();
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    // Bernoulli-number coefficients B_2n / (2n)
    let series = inv2
        * (T::of(1.0 / 12.0)
            - inv2
                * (T::of(1.0 / 120.0)
                    - inv2
                        * (T::of(1.0 / 252.0)
                            - inv2
                                * (T::of(1.0 / 240.0)
                                    - inv2 * (T::of(1.0 / 132.0) - inv2 * T::of(691.0 / 32760.0))))));
    x.ln() - T::of(0.5) * inv - series - shift
}

/// ψ at a positive integer count.
#[inline]
pub(crate) fn digamma_count<T: Scalar>(n: usize) -> T {
    debug_assert!(n > 0);
    digamma_unchecked(T::of_usize(n))
}
