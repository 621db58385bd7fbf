//! Interior-point contact: log-barrier over point-triangle and edge-edge
//! primitive pairs expressed through the unified `(c, t)` distance form.

mod audit;
mod barrier;
mod constraints;
mod distance;
mod ground;
mod hash;
mod kernels;

pub use audit::{audit_positions, edge_triangle_intersect, AuditReport, HalfSpace};
pub use barrier::{barrier, barrier_terms, checked_barrier, BarrierTerms};
pub use constraints::{
    build_exclusion_table, compute_constraint_set, proximity_pairs, ConstraintKey, ConstraintSet,
    ContactConstraint, ContactError, ContactKind, ExclusionTable, Proximity, Surface,
    EXCLUSION_FACTOR,
};
pub use distance::{
    closest_point_edge_edge, closest_point_triangle, ClosestPoint, DEGENERATE_TRIANGLE,
    PARALLEL_EDGES,
};
pub use ground::ground_contact_constraints;
pub use hash::{Aabb, SpatialHash};
pub use kernels::{
    barrier_diag_hessian_scatter, barrier_energy, barrier_gradient_scatter, barrier_quadratic_form,
    constraint_diag_hessian, constraint_gradient, constraint_quadratic_form,
    curvature_coefficients,
};

use crate::real::Real;

/// Default activation distance: half the average surface edge length.
pub fn default_d_hat<T: Real>(average_edge: T) -> T {
    average_edge * T::of(0.5)
}

/// Broad-phase cell size: `max(d̂, average surface edge length)`.
pub fn default_cell_size<T: Real>(d_hat: T, average_edge: T) -> T {
    d_hat.max(average_edge)
}
