//! Barrier energy, gradient, Hessian diagonal and Hessian quadratic form
//! summed over a constraint set.
//!
//! With `∂t/∂x = [c0 I, c1 I, c2 I, c3 I]ᵀ` the per-constraint Hessian is
//!
//! ```text
//! κ [ A (∂t/∂x t)(∂t/∂x t)ᵀ + B (∂t/∂x)(∂t/∂x)ᵀ ],   A = b''/d² − b'/d³,  B = b'/d
//! ```
//!
//! so its diagonal is `κ[A (cᵢ t)∘² + B cᵢ²]` and its quadratic form is
//! `κ[A (wᵀt)² + B ‖w‖²]` with `w = Σ cᵢ pᵢ`.

use super::barrier::barrier_terms;
use super::constraints::{ConstraintSet, ContactConstraint, ContactKind};
use crate::real::Real;
use nalgebra::Vector3;

/// `(A, B)` curvature coefficients of one constraint, without `κ`.
///
/// A half-space constraint has `d` affine in `x`, so only the normal term survives.
#[inline]
pub fn curvature_coefficients<T: Real>(c: &ContactConstraint<T>, d_hat: T) -> (T, T) {
    let bt = barrier_terms(c.d, d_hat);
    let d2 = c.d * c.d;
    match c.kind {
        ContactKind::Ground => (bt.second / d2, T::zero()),
        _ => (bt.second / d2 - bt.first / (d2 * c.d), bt.first / c.d),
    }
}

/// Per-vertex gradient of `κ b(d)` for one constraint.
#[inline]
pub fn constraint_gradient<T: Real>(c: &ContactConstraint<T>, kappa: T, d_hat: T) -> [Vector3<T>; 4] {
    let s = kappa * barrier_terms(c.d, d_hat).first / c.d;
    c.c.map(|ci| c.t * (s * ci))
}

/// Diagonal of the per-constraint Hessian, per vertex.
#[inline]
pub fn constraint_diag_hessian<T: Real>(c: &ContactConstraint<T>, kappa: T, d_hat: T) -> [Vector3<T>; 4] {
    let (a, b) = curvature_coefficients(c, d_hat);
    c.c.map(|ci| {
        let ct = c.t * ci;
        (ct.component_mul(&ct) * a).add_scalar(b * ci * ci) * kappa
    })
}

/// `pᵀ H p` of one constraint given the direction at its four vertices.
#[inline]
pub fn constraint_quadratic_form<T: Real>(
    c: &ContactConstraint<T>,
    kappa: T,
    d_hat: T,
    p: &[Vector3<T>; 4],
) -> T {
    let w = p[0] * c.c[0] + p[1] * c.c[1] + p[2] * c.c[2] + p[3] * c.c[3];
    let (a, b) = curvature_coefficients(c, d_hat);
    let wt = w.dot(&c.t);
    kappa * (a * wt * wt + b * w.norm_squared())
}

fn scatter<T: Real>(verts: &[usize; 4], kind: ContactKind, local: [Vector3<T>; 4], out: &mut [Vector3<T>]) {
    if kind == ContactKind::Ground {
        out[verts[0]] += local[0];
        return;
    }
    for (v, g) in verts.iter().zip(local) {
        out[*v] += g;
    }
}

/// `κ Σ b(d_k)`.
pub fn barrier_energy<T: Real>(cs: &ConstraintSet<T>) -> T {
    cs.constraints
        .iter()
        .fold(T::zero(), |acc, c| acc + barrier_terms(c.d, cs.d_hat).value)
        * cs.kappa
}

/// Adds the barrier gradient of every constraint into `out` (one entry per vertex).
pub fn barrier_gradient_scatter<T: Real>(cs: &ConstraintSet<T>, out: &mut [Vector3<T>]) {
    for c in &cs.constraints {
        scatter(&c.verts, c.kind, constraint_gradient(c, cs.kappa, cs.d_hat), out);
    }
}

/// Adds the barrier Hessian diagonal of every constraint into `out`.
pub fn barrier_diag_hessian_scatter<T: Real>(cs: &ConstraintSet<T>, out: &mut [Vector3<T>]) {
    for c in &cs.constraints {
        scatter(&c.verts, c.kind, constraint_diag_hessian(c, cs.kappa, cs.d_hat), out);
    }
}

/// `pᵀ (κ Σ ∂²b/∂x²) p` for a global direction `p`.
pub fn barrier_quadratic_form<T: Real>(cs: &ConstraintSet<T>, p: &[Vector3<T>]) -> T {
    cs.constraints.iter().fold(T::zero(), |acc, c| {
        let local = local_direction(c, p);
        acc + constraint_quadratic_form(c, cs.kappa, cs.d_hat, &local)
    })
}

#[inline]
pub(crate) fn local_direction<T: Real>(c: &ContactConstraint<T>, p: &[Vector3<T>]) -> [Vector3<T>; 4] {
    if c.kind == ContactKind::Ground {
        [p[c.verts[0]], Vector3::zeros(), Vector3::zeros(), Vector3::zeros()]
    } else {
        c.verts.map(|v| p[v])
    }
}
