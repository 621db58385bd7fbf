//! Single-pass step size: exact Newton step along `p`, capped by the
//! activation distance.

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch<T> {
    pub alpha: T,
    /// Predicted energy decrease `−α gᵀp − ½α² pᵀHp`.
    pub de: T,
    /// The cap `d̂ / (2‖p‖∞)` was the binding bound.
    pub capped: bool,
    /// Curvature or descent check failed; the next direction must restart.
    pub restart: bool,
}

/// Step-size upper bound that keeps every vertex within `d̂/2` of its start.
#[inline]
pub fn step_cap<T: Real>(d_hat: T, p_inf: T) -> T {
    d_hat / (T::of(2.0) * p_inf)
}

/// Step size from `gᵀp`, `pᵀHp` and `‖p‖∞`.
///
/// Returns `None` for a zero direction. When `pᵀHp ≤ min_curvature` or
/// `gᵀp ≥ 0` the step falls back to half the cap and flags a restart.
pub fn line_search_alpha<T: Real>(g_dot_p: T, quad: T, p_inf: T, d_hat: T, min_curvature: T) -> Option<LineSearch<T>> {
    if !(p_inf > T::zero()) {
        return None;
    }
    let cap = step_cap(d_hat, p_inf);
    let (alpha, capped, restart) = if !(quad > min_curvature) || g_dot_p >= T::zero() {
        (cap * T::of(0.5), false, true)
    } else {
        let newton = -g_dot_p / quad;
        if cap < newton {
            (cap, true, false)
        } else {
            (newton, false, false)
        }
    };
    Some(LineSearch {
        alpha,
        de: predicted_decrease(alpha, g_dot_p, quad),
        capped,
        restart,
    })
}

#[inline]
pub fn predicted_decrease<T: Real>(alpha: T, g_dot_p: T, quad: T) -> T {
    -alpha * g_dot_p - alpha * alpha * T::of(0.5) * quad
}
