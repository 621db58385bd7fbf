//! Discrete penetration audit of a single configuration.
//!
//! Reports the minimum point-triangle / edge-edge distance over all surface
//! pairs that share no vertex, the minimum vertex clearance above every
//! half-space, and the number of surface edges that cross a surface triangle.
//! A distance check alone would miss an edge that pierces a large triangle
//! with both endpoints far away, hence the intersection test.

use super::constraints::{proximity_pairs, ContactKind, Surface};
use super::distance::{closest_point_edge_edge, closest_point_triangle};
use super::hash::{Aabb, SpatialHash};
use crate::real::Real;
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `{ y : n·(y − point) ≥ 0 }` with unit outward normal `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub point: [f64; 3],
    pub normal: [f64; 3],
}

impl HalfSpace {
    pub fn new(point: Vector3<f64>, normal: Vector3<f64>) -> Self {
        let n = normal.normalize();
        HalfSpace {
            point: point.into(),
            normal: n.into(),
        }
    }

    pub fn signed_distance<T: Real>(&self, x: &Vector3<T>) -> T {
        let n = Vector3::from(self.normal).map(T::of);
        let p = Vector3::from(self.point).map(T::of);
        n.dot(&(x - p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Minimum over primitive pairs and half-spaces; `+∞` if there is nothing to measure.
    pub min_distance: f64,
    pub min_pair: Option<(ContactKind, [usize; 4])>,
    pub min_ground_distance: f64,
    pub intersections: usize,
}

impl AuditReport {
    pub fn penetration_free(&self) -> bool {
        self.min_distance > 0.0 && self.intersections == 0
    }
}

/// Does segment `a–b` cross triangle `(p, q, r)`? Touching counts.
pub fn edge_triangle_intersect<T: Real>(
    a: &Vector3<T>,
    b: &Vector3<T>,
    p: &Vector3<T>,
    q: &Vector3<T>,
    r: &Vector3<T>,
) -> bool {
    let z = T::zero();
    let e1 = q - p;
    let e2 = r - p;
    let n = e1.cross(&e2);
    let da = n.dot(&(a - p));
    let db = n.dot(&(b - p));
    if (da > z && db > z) || (da < z && db < z) || da == db {
        // Same side, or parallel to the plane (coplanar contact shows up as d = 0).
        return false;
    }
    let s = da / (da - db);
    let hit = a + (b - a) * s;
    let c0 = (q - p).cross(&(hit - p)).dot(&n);
    let c1 = (r - q).cross(&(hit - q)).dot(&n);
    let c2 = (p - r).cross(&(hit - r)).dot(&n);
    c0 >= z && c1 >= z && c2 >= z
}

fn count_intersections<T: Real>(surface: Surface<'_>, x: &[Vector3<T>], cell: T) -> usize {
    let eps = cell * T::of(1e-9);
    let boxes = surface
        .faces
        .iter()
        .map(|f| Aabb::from_points(&[x[f[0]], x[f[1]], x[f[2]]]).inflated(eps))
        .collect();
    let hash = SpatialHash::build(boxes, cell);
    surface
        .edges
        .par_iter()
        .map_init(Vec::new, |buf, e| {
            hash.query_into(&Aabb::from_points(&[x[e[0]], x[e[1]]]).inflated(eps), buf);
            buf.iter()
                .filter(|&&fi| {
                    let f = surface.faces[fi];
                    !f.contains(&e[0])
                        && !f.contains(&e[1])
                        && edge_triangle_intersect(&x[e[0]], &x[e[1]], &x[f[0]], &x[f[1]], &x[f[2]])
                })
                .count()
        })
        .sum()
}

fn brute_force_min<T: Real>(surface: Surface<'_>, x: &[Vector3<T>]) -> (f64, Option<(ContactKind, [usize; 4])>) {
    let pt = surface
        .vertices
        .par_iter()
        .flat_map_iter(|&v| {
            surface.faces.iter().filter(move |f| !f.contains(&v)).filter_map(move |f| {
                closest_point_triangle(&x[v], &x[f[0]], &x[f[1]], &x[f[2]])
                    .map(|cp| (cp.d.to_f64(), (ContactKind::PointTriangle, [v, f[0], f[1], f[2]])))
            })
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ee = (0..surface.edges.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = surface.edges[i];
            surface.edges[i + 1..]
                .iter()
                .filter(move |b| !a.contains(&b[0]) && !a.contains(&b[1]))
                .filter_map(move |b| {
                    closest_point_edge_edge(&x[a[0]], &x[a[1]], &x[b[0]], &x[b[1]])
                        .map(|cp| (cp.d.to_f64(), (ContactKind::EdgeEdge, [a[0], a[1], b[0], b[1]])))
                })
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match (pt, ee) {
        (Some(a), Some(b)) => {
            let m = if b.0 < a.0 { b } else { a };
            (m.0, Some(m.1))
        }
        (Some(a), None) | (None, Some(a)) => (a.0, Some(a.1)),
        (None, None) => (f64::INFINITY, None),
    }
}

/// Audits one configuration. `search_radius = None` runs the exact all-pairs
/// minimum; `Some(r)` uses the spatial hash, growing `r` until a pair is
/// found (the result is the same minimum).
pub fn audit_positions<T: Real>(
    surface: Surface<'_>,
    x: &[Vector3<T>],
    planes: &[HalfSpace],
    search_radius: Option<f64>,
) -> AuditReport {
    let (lo, hi) = x.iter().fold((x[0], x[0]), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    let diag = (hi - lo).norm().to_f64().max(1e-12);

    let (min_pair_d, min_pair) = match search_radius {
        None => brute_force_min(surface, x),
        Some(r0) => {
            let mut r = r0.max(1e-12 * diag);
            loop {
                let prox = proximity_pairs(surface, x, T::of(r), T::of(r), |_, _| true);
                let best = prox
                    .pairs
                    .iter()
                    .map(|c| (c.d.to_f64(), (c.kind, c.verts)))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                if let Some((d, pair)) = best {
                    break (d, Some(pair));
                }
                if r > 2.0 * diag {
                    break (f64::INFINITY, None);
                }
                r *= 4.0;
            }
        }
    };

    let min_ground_distance = planes
        .iter()
        .flat_map(|h| surface.vertices.iter().map(move |&v| h.signed_distance(&x[v]).to_f64()))
        .fold(f64::INFINITY, f64::min);

    let cell = T::of(diag / (surface.faces.len().max(1) as f64).cbrt());
    let intersections = count_intersections(surface, x, cell);
    AuditReport {
        min_distance: min_pair_d.min(min_ground_distance),
        min_pair,
        min_ground_distance,
        intersections,
    }
}
