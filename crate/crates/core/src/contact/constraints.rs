//! Constraint detection: broad phase, narrow phase and the rest-pose exclusion table.

use super::distance::{closest_point_edge_edge, closest_point_triangle, ClosestPoint};
use super::hash::{Aabb, SpatialHash};
use crate::mesh::TetMesh;
use crate::real::Real;
use nalgebra::Vector3;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    PointTriangle,
    EdgeEdge,
    /// A surface vertex against an analytic half-space. `verts` repeats the
    /// vertex, `c = (1, 0, 0, 0)` and `t = d·n`.
    Ground,
}

/// Identity of a primitive pair, independent of vertex order within the
/// triangle or the edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintKey {
    pub kind: ContactKind,
    pub verts: [usize; 4],
}

impl ConstraintKey {
    pub fn new(kind: ContactKind, v: [usize; 4]) -> Self {
        let verts = match kind {
            ContactKind::PointTriangle => {
                let mut tri = [v[1], v[2], v[3]];
                tri.sort_unstable();
                [v[0], tri[0], tri[1], tri[2]]
            }
            ContactKind::EdgeEdge => {
                let a = [v[0].min(v[1]), v[0].max(v[1])];
                let b = [v[2].min(v[3]), v[2].max(v[3])];
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                [a[0], a[1], b[0], b[1]]
            }
            ContactKind::Ground => v,
        };
        ConstraintKey { kind, verts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactConstraint<T: Real> {
    pub kind: ContactKind,
    pub verts: [usize; 4],
    pub c: [T; 4],
    pub t: Vector3<T>,
    pub d: T,
}

impl<T: Real> ContactConstraint<T> {
    pub fn key(&self) -> ConstraintKey {
        ConstraintKey::new(self.kind, self.verts)
    }

    fn from_closest(kind: ContactKind, verts: [usize; 4], cp: ClosestPoint<T>) -> Self {
        ContactConstraint {
            kind,
            verts,
            c: cp.c,
            t: cp.t,
            d: cp.d,
        }
    }
}

/// Active constraints at one configuration together with the barrier parameters.
#[derive(Debug, Clone)]
pub struct ConstraintSet<T: Real> {
    pub constraints: Vec<ContactConstraint<T>>,
    pub kappa: T,
    pub d_hat: T,
    /// Candidate pairs skipped because a primitive was degenerate.
    pub skipped_degenerate: usize,
}

impl<T: Real> ConstraintSet<T> {
    pub fn empty(kappa: T, d_hat: T) -> Self {
        ConstraintSet {
            constraints: Vec::new(),
            kappa,
            d_hat,
            skipped_degenerate: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn min_distance(&self) -> Option<T> {
        self.constraints.iter().map(|c| c.d).reduce(|a, b| a.min(b))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContactError {
    #[error("penetration: {kind:?} pair {verts:?} at distance {d:e}")]
    Penetration {
        kind: ContactKind,
        verts: [usize; 4],
        d: f64,
    },
}

/// Primitive pairs that were already close at rest and never become constraints.
#[derive(Debug, Clone, Default)]
pub struct ExclusionTable {
    set: FxHashSet<ConstraintKey>,
}

impl ExclusionTable {
    pub fn contains(&self, key: &ConstraintKey) -> bool {
        self.set.contains(key)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &ConstraintKey> {
        self.set.iter()
    }
}

impl FromIterator<ConstraintKey> for ExclusionTable {
    fn from_iter<I: IntoIterator<Item = ConstraintKey>>(iter: I) -> Self {
        ExclusionTable {
            set: iter.into_iter().collect(),
        }
    }
}

/// Borrowed view of a triangle surface.
#[derive(Debug, Clone, Copy)]
pub struct Surface<'a> {
    pub vertices: &'a [usize],
    pub edges: &'a [[usize; 2]],
    pub faces: &'a [[usize; 3]],
}

impl<'a> Surface<'a> {
    pub fn of<T: Real>(mesh: &'a TetMesh<T>) -> Self {
        Surface {
            vertices: &mesh.surface_vertices,
            edges: &mesh.surface_edges,
            faces: &mesh.surface_faces,
        }
    }
}

/// Result of a proximity search.
#[derive(Debug, Clone)]
pub struct Proximity<T: Real> {
    pub pairs: Vec<ContactConstraint<T>>,
    pub skipped_degenerate: usize,
}

/// Finds every point-triangle and edge-edge pair of `surface` closer than
/// `radius`, excluding pairs that share a vertex and pairs rejected by
/// `accept`. Pairs are returned in a deterministic order: all point-triangle
/// pairs by (vertex, face), then edge-edge pairs by (edge, edge).
///
/// Pairs at distance `≤ 0` are returned too; callers decide whether that
/// is a fault.
pub fn proximity_pairs<T, F>(
    surface: Surface<'_>,
    x: &[Vector3<T>],
    radius: T,
    cell_size: T,
    accept: F,
) -> Proximity<T>
where
    T: Real,
    F: Fn(ContactKind, &[usize; 4]) -> bool + Sync,
{
    let half = radius * T::of(0.5);
    let face_boxes = surface
        .faces
        .iter()
        .map(|f| Aabb::from_points(&[x[f[0]], x[f[1]], x[f[2]]]).inflated(half))
        .collect();
    let face_hash = SpatialHash::build(face_boxes, cell_size);
    let edge_boxes: Vec<Aabb<T>> = surface
        .edges
        .iter()
        .map(|e| Aabb::from_points(&[x[e[0]], x[e[1]]]).inflated(half))
        .collect();
    let edge_hash = SpatialHash::build(edge_boxes.clone(), cell_size);

    let pt: Vec<(Vec<ContactConstraint<T>>, usize)> = surface
        .vertices
        .par_iter()
        .map_init(Vec::new, |buf, &v| {
            let mut out = Vec::new();
            let mut skipped = 0;
            face_hash.query_into(&Aabb::from_points(&[x[v]]).inflated(half), buf);
            for &fi in buf.iter() {
                let f = surface.faces[fi];
                if f.contains(&v) {
                    continue;
                }
                let verts = [v, f[0], f[1], f[2]];
                match closest_point_triangle(&x[v], &x[f[0]], &x[f[1]], &x[f[2]]) {
                    Some(cp) if cp.d < radius => {
                        if accept(ContactKind::PointTriangle, &verts) {
                            out.push(ContactConstraint::from_closest(ContactKind::PointTriangle, verts, cp));
                        }
                    }
                    Some(_) => {}
                    None => skipped += 1,
                }
            }
            (out, skipped)
        })
        .collect();

    let ee: Vec<(Vec<ContactConstraint<T>>, usize)> = (0..surface.edges.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let mut out = Vec::new();
            let mut skipped = 0;
            let a = surface.edges[i];
            edge_hash.query_into(&edge_boxes[i], buf);
            for &j in buf.iter() {
                if j <= i {
                    continue;
                }
                let b = surface.edges[j];
                if a.contains(&b[0]) || a.contains(&b[1]) {
                    continue;
                }
                let verts = [a[0], a[1], b[0], b[1]];
                match closest_point_edge_edge(&x[a[0]], &x[a[1]], &x[b[0]], &x[b[1]]) {
                    Some(cp) if cp.d < radius => {
                        if accept(ContactKind::EdgeEdge, &verts) {
                            out.push(ContactConstraint::from_closest(ContactKind::EdgeEdge, verts, cp));
                        }
                    }
                    Some(_) => {}
                    None => skipped += 1,
                }
            }
            (out, skipped)
        })
        .collect();

    let mut pairs = Vec::new();
    let mut skipped_degenerate = 0;
    for (list, s) in pt.into_iter().chain(ee) {
        pairs.extend(list);
        skipped_degenerate += s;
    }
    Proximity {
        pairs,
        skipped_degenerate,
    }
}

/// Active barrier constraints at `x`: all surface pairs with `0 < d < d̂`
/// that share no vertex and are not in the exclusion table.
pub fn compute_constraint_set<T: Real>(
    mesh: &TetMesh<T>,
    x: &[Vector3<T>],
    d_hat: T,
    kappa: T,
    exclusion: &ExclusionTable,
    cell_size: T,
) -> Result<ConstraintSet<T>, ContactError> {
    let prox = proximity_pairs(Surface::of(mesh), x, d_hat, cell_size, |kind, v| {
        exclusion.is_empty() || !exclusion.contains(&ConstraintKey::new(kind, *v))
    });
    if let Some(bad) = prox.pairs.iter().find(|c| !(c.d > T::zero())) {
        return Err(ContactError::Penetration {
            kind: bad.kind,
            verts: bad.verts,
            d: bad.d.to_f64(),
        });
    }
    Ok(ConstraintSet {
        constraints: prox.pairs,
        kappa,
        d_hat,
        skipped_degenerate: prox.skipped_degenerate,
    })
}

/// Rest-pose multiplier on `d̂` below which self-contact pairs are excluded.
pub const EXCLUSION_FACTOR: f64 = 1.5;

/// Pairs of the same object closer than `1.5·d̂` in the rest configuration.
pub fn build_exclusion_table<T: Real>(mesh: &TetMesh<T>, d_hat: T, cell_size: T) -> ExclusionTable {
    let radius = d_hat * T::of(EXCLUSION_FACTOR);
    let obj = &mesh.vertex_object;
    let prox = proximity_pairs(
        Surface::of(mesh),
        &mesh.vertices_rest,
        radius,
        cell_size.max(radius),
        |_, v| v.iter().all(|&k| obj[k] == obj[v[0]]),
    );
    prox.pairs.iter().map(|c| c.key()).collect()
}
