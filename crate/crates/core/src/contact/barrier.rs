//! The clamped log barrier `b(d) = −(d − d̂)² ln(d/d̂)` on `(0, d̂)`, zero beyond.

use crate::real::Real;

/// `b`, `∂b/∂d` and `∂²b/∂d²` at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierTerms<T> {
    pub value: T,
    pub first: T,
    pub second: T,
}

/// Barrier value. Panics in debug builds for `d ≤ 0`; use
/// [`checked_barrier`] where the distance is not already known to be positive.
#[inline]
pub fn barrier<T: Real>(d: T, d_hat: T) -> T {
    debug_assert!(d > T::zero(), "barrier evaluated at non-positive distance");
    if d >= d_hat {
        return T::zero();
    }
    let a = d - d_hat;
    -(a * a) * (d / d_hat).ln()
}

/// `None` when `d ≤ 0`: the primitives touch or have crossed.
pub fn checked_barrier<T: Real>(d: T, d_hat: T) -> Option<T> {
    (d > T::zero()).then(|| barrier(d, d_hat))
}

#[inline]
pub fn barrier_terms<T: Real>(d: T, d_hat: T) -> BarrierTerms<T> {
    if d >= d_hat {
        return BarrierTerms {
            value: T::zero(),
            first: T::zero(),
            second: T::zero(),
        };
    }
    let two = T::of(2.0);
    let a = d - d_hat;
    let l = (d / d_hat).ln();
    let a_over_d = a / d;
    BarrierTerms {
        value: -(a * a) * l,
        first: -two * a * l - a * a_over_d,
        second: -two * l - T::of(4.0) * a_over_d + a_over_d * a_over_d,
    }
}
