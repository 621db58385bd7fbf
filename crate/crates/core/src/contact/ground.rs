//! Analytic half-space obstacles.

use super::audit::HalfSpace;
use super::constraints::{ContactConstraint, ContactError, ContactKind};
use crate::real::Real;
use nalgebra::Vector3;

/// One constraint per listed vertex whose signed distance to `plane` lies in
/// `(0, d̂)`. `d` is affine in the vertex position, so the constraint carries
/// `c = (1, 0, 0, 0)` and `t = d·n` and runs through the shared barrier kernels.
pub fn ground_contact_constraints<T: Real>(
    vertices: &[usize],
    x: &[Vector3<T>],
    plane: &HalfSpace,
    d_hat: T,
) -> Result<Vec<ContactConstraint<T>>, ContactError> {
    let n = Vector3::from(plane.normal).map(T::of);
    let mut out = Vec::new();
    for &v in vertices {
        let d = plane.signed_distance(&x[v]);
        if !(d > T::zero()) {
            return Err(ContactError::Penetration {
                kind: ContactKind::Ground,
                verts: [v; 4],
                d: d.to_f64(),
            });
        }
        if d < d_hat {
            out.push(ContactConstraint {
                kind: ContactKind::Ground,
                verts: [v; 4],
                c: [T::one(), T::zero(), T::zero(), T::zero()],
                t: n * d,
                d,
            });
        }
    }
    Ok(out)
}
