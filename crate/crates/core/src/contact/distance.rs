//! Point-triangle and edge-edge distances in the unified form
//! `t = c0·x0 + c1·x1 + c2·x2 + c3·x3`, `d = ‖t‖`.
//!
//! Point-triangle: `c0 = 1`, `c1..c3 = −(barycentric weights)`.
//! Edge-edge: `c0, c1` weight the first edge, `−c2, −c3` the second.
//! Closest points on a boundary of the parameter domain leave some
//! coefficients at exactly zero, which covers the point-edge and point-point
//! sub-cases without a separate classification step.

use crate::real::Real;
use nalgebra::Vector3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint<T: Real> {
    pub c: [T; 4],
    pub t: Vector3<T>,
    pub d: T,
}

/// Relative area below which a triangle is considered degenerate.
pub const DEGENERATE_TRIANGLE: f64 = 1e-12;
/// `sin²` of the angle below which two edges are treated as parallel.
pub const PARALLEL_EDGES: f64 = 1e-12;

/// Closest point of triangle `(x1, x2, x3)` to `x0`.
///
/// Region tests follow the Voronoi-region walk of the triangle (vertices,
/// then edges, then interior); ties on region boundaries go to the region
/// tested first, which keeps the result continuous.
/// Returns `None` for a degenerate triangle.
pub fn closest_point_triangle<T: Real>(
    x0: &Vector3<T>,
    x1: &Vector3<T>,
    x2: &Vector3<T>,
    x3: &Vector3<T>,
) -> Option<ClosestPoint<T>> {
    let z = T::zero();
    let one = T::one();
    let ab = x2 - x1;
    let ac = x3 - x1;
    let scale = ab.norm_squared().max(ac.norm_squared()).max((x3 - x2).norm_squared());
    if !(ab.cross(&ac).norm() > T::of(DEGENERATE_TRIANGLE) * scale) {
        return None;
    }

    let ap = x0 - x1;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    let bp = x0 - x2;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    let cp = x0 - x3;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);

    // Barycentric weights (u, v, w) of x1, x2, x3.
    let (u, v, w) = if d1 <= z && d2 <= z {
        (one, z, z)
    } else if d3 >= z && d4 <= d3 {
        (z, one, z)
    } else if d6 >= z && d5 <= d6 {
        (z, z, one)
    } else {
        let vc = d1 * d4 - d3 * d2;
        let vb = d5 * d2 - d1 * d6;
        let va = d3 * d6 - d5 * d4;
        if vc <= z && d1 >= z && d3 <= z {
            let s = d1 / (d1 - d3);
            (one - s, s, z)
        } else if vb <= z && d2 >= z && d6 <= z {
            let s = d2 / (d2 - d6);
            (one - s, z, s)
        } else if va <= z && d4 - d3 >= z && d5 - d6 >= z {
            let s = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            (z, one - s, s)
        } else {
            let denom = va + vb + vc;
            (va / denom, vb / denom, vc / denom)
        }
    };
    let t = ap - ab * v - ac * w;
    Some(ClosestPoint {
        c: [one, -u, -v, -w],
        d: t.norm(),
        t,
    })
}

/// Closest points between edges `x0–x1` and `x2–x3`.
///
/// Parallel edges with an overlapping projection take the witness at the
/// center of the overlap. Returns `None` if either edge has zero length.
pub fn closest_point_edge_edge<T: Real>(
    x0: &Vector3<T>,
    x1: &Vector3<T>,
    x2: &Vector3<T>,
    x3: &Vector3<T>,
) -> Option<ClosestPoint<T>> {
    let z = T::zero();
    let one = T::one();
    let d1 = x1 - x0;
    let d2 = x3 - x2;
    let r = x0 - x2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    if !(a > z) || !(e > z) {
        return None;
    }
    let b = d1.dot(&d2);
    let c = d1.dot(&r);
    let f = d2.dot(&r);
    let clamp = |v: T| v.max(z).min(one);
    let make = |s: T, u: T| {
        let t = r + d1 * s - d2 * u;
        ClosestPoint {
            c: [one - s, s, u - one, -u],
            d: t.norm(),
            t,
        }
    };

    let denom = a * e - b * b;
    if denom > T::of(PARALLEL_EDGES) * a * e {
        let mut s = clamp((b * f - c * e) / denom);
        let mut u = (b * s + f) / e;
        if u < z {
            u = z;
            s = clamp(-c / a);
        } else if u > one {
            u = one;
            s = clamp((b - c) / a);
        }
        return Some(make(s, u));
    }

    // (Nearly) parallel: the minimum is attained at an endpoint projection.
    let candidates = [
        (z, clamp(f / e)),
        (one, clamp((b + f) / e)),
        (clamp(-c / a), z),
        (clamp((b - c) / a), one),
    ];
    let mut best = make(candidates[0].0, candidates[0].1);
    for &(s, u) in &candidates[1..] {
        let cp = make(s, u);
        if cp.d < best.d {
            best = cp;
        }
    }
    // Prefer the overlap-midpoint witness whenever it is just as close.
    let (p0, p1) = (-c / a, (b - c) / a);
    let lo = p0.min(p1).max(z);
    let hi = p0.max(p1).min(one);
    if lo <= hi {
        let s = (lo + hi) * T::of(0.5);
        let mid = make(s, clamp((b * s + f) / e));
        let slack = T::of(1e-14) * (a.sqrt() + e.sqrt() + r.norm());
        if mid.d <= best.d + slack {
            return Some(mid);
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn check_pt(cp: &ClosestPoint<f64>, x: [Vector3<f64>; 4]) {
        assert_eq!(cp.c[0], 1.0);
        assert!(cp.c[1..].iter().all(|&c| c <= 0.0));
        assert!((cp.c[1] + cp.c[2] + cp.c[3] + 1.0).abs() < 1e-14);
        let t = x[0] * cp.c[0] + x[1] * cp.c[1] + x[2] * cp.c[2] + x[3] * cp.c[3];
        assert!((t - cp.t).norm() < 1e-12);
        assert!((cp.t.norm() - cp.d).abs() < 1e-15);
    }

    #[test]
    fn point_above_vertex() {
        let x = [v(0.0, 0.0, 1.0), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)];
        let cp = closest_point_triangle(&x[0], &x[1], &x[2], &x[3]).unwrap();
        assert_eq!(cp.d, 1.0);
        assert_eq!(cp.t, v(0.0, 0.0, 1.0));
        assert_eq!(cp.c, [1.0, -1.0, 0.0, 0.0]);
        check_pt(&cp, x);
    }

    #[test]
    fn point_above_interior() {
        let x = [v(0.25, 0.25, 0.5), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)];
        let cp = closest_point_triangle(&x[0], &x[1], &x[2], &x[3]).unwrap();
        assert!((cp.d - 0.5).abs() < 1e-15);
        for (a, b) in cp.c.iter().zip([1.0, -0.5, -0.25, -0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
        check_pt(&cp, x);
    }

    #[test]
    fn point_near_edge_gives_point_edge() {
        let x = [v(0.5, -0.3, 0.4), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)];
        let cp = closest_point_triangle(&x[0], &x[1], &x[2], &x[3]).unwrap();
        assert_eq!(cp.c[3], 0.0);
        assert!((cp.d - 0.5).abs() < 1e-15);
        check_pt(&cp, x);
    }

    #[test]
    fn degenerate_triangle_skipped() {
        let p = v(0.0, 0.0, 1.0);
        assert!(closest_point_triangle(&p, &v(0.0, 0.0, 0.0), &v(1.0, 0.0, 0.0), &v(2.0, 0.0, 0.0)).is_none());
        assert!(closest_point_edge_edge(&p, &p, &v(0.0, 0.0, 0.0), &v(1.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn crossing_edges() {
        let x = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.5, -0.5, 1.0), v(0.5, 0.5, 1.0)];
        let cp = closest_point_edge_edge(&x[0], &x[1], &x[2], &x[3]).unwrap();
        assert!((cp.d - 1.0).abs() < 1e-15);
        for (a, b) in cp.c.iter().zip([0.5, 0.5, -0.5, -0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn parallel_edges_use_overlap_midpoint() {
        let x = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(1.0, 1.0, 0.0)];
        let cp = closest_point_edge_edge(&x[0], &x[1], &x[2], &x[3]).unwrap();
        assert!((cp.d - 1.0).abs() < 1e-15);
        assert_eq!(cp.c, [0.5, 0.5, -0.5, -0.5]);

        // Partial overlap [0.5, 1] of the first edge.
        let y = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.5, 0.0, 2.0), v(3.0, 0.0, 2.0)];
        let cp = closest_point_edge_edge(&y[0], &y[1], &y[2], &y[3]).unwrap();
        assert!((cp.d - 2.0).abs() < 1e-15);
        assert!((cp.c[1] - 0.75).abs() < 1e-15);

        // Disjoint collinear edges: nearest endpoints.
        let w = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(3.0, 0.0, 0.0), v(2.0, 0.0, 0.0)];
        let cp = closest_point_edge_edge(&w[0], &w[1], &w[2], &w[3]).unwrap();
        assert!((cp.d - 1.0).abs() < 1e-15);
        assert_eq!(cp.c, [0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn edge_edge_coefficient_signs() {
        let x = [v(0.1, 0.2, 0.3), v(1.4, -0.2, 0.5), v(-0.3, 0.9, 1.2), v(0.8, 0.1, -0.7)];
        let cp = closest_point_edge_edge(&x[0], &x[1], &x[2], &x[3]).unwrap();
        assert!(cp.c[0] >= 0.0 && cp.c[1] >= 0.0 && cp.c[2] <= 0.0 && cp.c[3] <= 0.0);
        assert!((cp.c[0] + cp.c[1] - 1.0).abs() < 1e-15);
        assert!((cp.c[2] + cp.c[3] + 1.0).abs() < 1e-15);
        let t = x[0] * cp.c[0] + x[1] * cp.c[1] + x[2] * cp.c[2] + x[3] * cp.c[3];
        assert!((t - cp.t).norm() < 1e-14);
    }
}
