//! Random sample generators shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use pncg_core::mesh::{MeshData, TetMesh};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let axis = Unit::new_normalize(unit_vector(rng));
    *Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..std::f64::consts::TAU)).matrix()
}

/// `U Σ Vᵀ` with positive singular values and `σmax/σmin ≤ max_cond`.
pub fn deformation_gradient(rng: &mut impl Rng, max_cond: f64) -> Matrix3<f64> {
    let lo: f64 = rng.gen_range(0.4..1.2);
    let ratio = max_cond.min(10.0);
    let s = Vector3::from_fn(|_, _| lo * rng.gen_range(1.0..ratio));
    let mut s = s;
    s[rng.gen_range(0..3)] = lo;
    rotation(rng) * Matrix3::from_diagonal(&s) * rotation(rng).transpose()
}

/// A single well-shaped random rest tet.
pub fn rest_tet(rng: &mut impl Rng) -> MeshData {
    loop {
        let mut v: Vec<Vector3<f64>> = (0..4).map(|_| Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0))).collect();
        let e = Matrix3::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0]]);
        let det = e.determinant();
        let svd = e.svd(false, false);
        let cond = svd.singular_values.max() / svd.singular_values.min();
        if det.abs() > 0.05 && cond < 6.0 {
            if det < 0.0 {
                v.swap(1, 2);
            }
            return MeshData { vertices: v, tets: vec![[0, 1, 2, 3]] };
        }
    }
}

/// Rest tet plus world positions whose deformation gradient is `f`.
pub fn deformed_tet(rng: &mut impl Rng, f: &Matrix3<f64>) -> (TetMesh, Vec<Vector3<f64>>) {
    let mesh = TetMesh::new(rest_tet(rng), 1000.0).unwrap();
    let b = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let x = mesh.vertices_rest.iter().map(|p| f * p + b).collect();
    (mesh, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Generic,
    /// Closest feature is a vertex or an edge of the triangle / an edge end.
    Boundary,
    /// Nearly parallel edges, or a point almost in the plane of a sliver.
    NearDegenerate,
    /// Distance down to 1e-6.
    VeryClose,
}

pub const SHAPES: [Shape; 4] = [Shape::Generic, Shape::Boundary, Shape::NearDegenerate, Shape::VeryClose];

fn scaled_distance(rng: &mut impl Rng, shape: Shape, scale: f64) -> f64 {
    match shape {
        Shape::VeryClose => scale * 10f64.powf(rng.gen_range(-6.0..-2.0)),
        _ => scale * rng.gen_range(0.01..1.0),
    }
}

/// Point `x0` and triangle `(x1, x2, x3)`, scaled to unit size.
pub fn point_triangle(rng: &mut impl Rng, shape: Shape) -> [Vector3<f64>; 4] {
    let r = rotation(rng);
    let o = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let (a, b, c) = match shape {
        Shape::NearDegenerate => {
            // Sliver: third vertex almost on the first edge.
            let t: f64 = rng.gen_range(0.1..0.9);
            let eps = 10f64.powf(rng.gen_range(-5.0..-2.0));
            (Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0), Vector3::new(t, eps, 0.0))
        }
        _ => (
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(rng.gen_range(0.5..1.5), 0.0, 0.0),
            Vector3::new(rng.gen_range(-0.5..1.5), rng.gen_range(0.3..1.5), 0.0),
        ),
    };
    let h = scaled_distance(rng, shape, 1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (u, v): (f64, f64) = match shape {
        Shape::Boundary => {
            // Barycentric point on or just outside an edge or a vertex.
            let w = rng.gen_range(0..6);
            let s = rng.gen_range(0.0..1.0);
            let out = rng.gen_range(-0.2..0.0);
            match w {
                0 => (s, out),
                1 => (out, s),
                2 => (s, 1.0 - s - out),
                3 => (out, out),
                4 => (1.0 - out, out),
                _ => (out, 1.0 - out),
            }
        }
        _ => (rng.gen_range(-0.5..1.2), rng.gen_range(-0.5..1.2)),
    };
    let p = a + (b - a) * u + (c - a) * v + Vector3::z() * h;
    [r * p + o, r * a + o, r * b + o, r * c + o]
}

/// Edges `x0–x1` and `x2–x3`, scaled to unit size.
pub fn edge_edge(rng: &mut impl Rng, shape: Shape) -> [Vector3<f64>; 4] {
    let r = rotation(rng);
    let o = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let len0: f64 = rng.gen_range(0.3..1.5);
    let len1: f64 = rng.gen_range(0.3..1.5);
    let angle: f64 = match shape {
        Shape::NearDegenerate => 10f64.powf(rng.gen_range(-8.0..-3.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
        _ => rng.gen_range(0.05..std::f64::consts::PI - 0.05),
    };
    let h = scaled_distance(rng, shape, 1.0);
    let s0 = match shape {
        Shape::Boundary => {
            if rng.gen_bool(0.5) {
                rng.gen_range(-0.3..0.0)
            } else {
                rng.gen_range(1.0..1.3)
            }
        }
        _ => rng.gen_range(-0.4..1.4),
    } * len0;
    let s1 = rng.gen_range(-0.4..1.4) * len1;
    let a0 = Vector3::new(-s0, 0.0, 0.0);
    let a1 = a0 + Vector3::new(len0, 0.0, 0.0);
    let dir = Vector3::new(angle.cos(), angle.sin(), 0.0);
    let b0 = Vector3::new(0.0, 0.0, h) - dir * s1;
    let b1 = b0 + dir * len1;
    [r * a0 + o, r * a1 + o, r * b0 + o, r * b1 + o]
}

pub mod checks;
