//! Closest-point routines and barrier kernels against brute-force and dense oracles.

mod common;

use common::checks::{barrier_fast_path_errors, constraint, distance_error};
use common::{edge_edge, point_triangle, rng, Shape, SHAPES};
use nalgebra::{SVector, Vector3};
use pncg_core::contact::{barrier, constraint_gradient, ContactKind};
use pncg_core::oracle::{fd_gradient, FD_STEP};

#[test]
fn closest_points_match_grid_search_10000_samples_seed_404() {
    let (e, n) = distance_error(404, 10_000);
    assert!(n >= 9_900, "only {n} non-degenerate samples");
    assert!(e <= 1e-7, "max abs error {e:e}");
}

#[test]
fn barrier_kernels_match_dense_1000_samples_seed_505() {
    let (d, q) = barrier_fast_path_errors(505, 1000);
    assert!(d <= 1e-10, "diagonal {d:e}");
    assert!(q <= 1e-10, "quadratic form {q:e}");
}

#[test]
fn constraint_gradient_matches_fd_of_recomputed_distance_seed_606() {
    let mut r = rng(606);
    for i in 0..300 {
        let (kind, x) = if i % 2 == 0 {
            (ContactKind::PointTriangle, point_triangle(&mut r, Shape::Generic))
        } else {
            (ContactKind::EdgeEdge, edge_edge(&mut r, Shape::Generic))
        };
        let Some(c) = constraint(kind, &x) else { continue };
        let d_hat = c.d * 2.0;
        let kappa = 3.0;
        let g = constraint_gradient(&c, kappa, d_hat);
        let flat: Vec<f64> = x.iter().flat_map(|p| [p.x, p.y, p.z]).collect();
        let e = |s: &[f64]| {
            let y: [Vector3<f64>; 4] = std::array::from_fn(|k| Vector3::new(s[3 * k], s[3 * k + 1], s[3 * k + 2]));
            kappa * barrier(constraint(kind, &y).unwrap().d, d_hat)
        };
        let fd = fd_gradient(e, &flat, FD_STEP).unwrap();
        let ga = SVector::<f64, 12>::from_fn(|k, _| g[k / 3][k % 3]);
        let gf = SVector::<f64, 12>::from_column_slice(&fd);
        assert!((ga - gf).norm() <= 1e-5 * ga.norm().max(gf.norm()), "sample {i}: {ga} vs {gf}");
    }
}

#[test]
fn unified_distance_reproduces_t() {
    let mut r = rng(707);
    for i in 0..2000 {
        let shape = SHAPES[i % SHAPES.len()];
        let (kind, x) = if i % 2 == 0 {
            (ContactKind::PointTriangle, point_triangle(&mut r, shape))
        } else {
            (ContactKind::EdgeEdge, edge_edge(&mut r, shape))
        };
        let Some(c) = constraint(kind, &x) else { continue };
        let t: Vector3<f64> = (0..4).map(|k| x[k] * c.c[k]).sum();
        assert!((t - c.t).norm() <= 1e-12 * (1.0 + x[0].norm()));
        assert!((t.norm() - c.d).abs() <= 1e-12);
        match kind {
            ContactKind::PointTriangle => {
                assert_eq!(c.c[0], 1.0);
                assert!(c.c[1..].iter().all(|&v| v <= 0.0));
                assert!((c.c[1] + c.c[2] + c.c[3] + 1.0).abs() <= 1e-12);
            }
            _ => {
                assert!(c.c[0] >= 0.0 && c.c[1] >= 0.0 && c.c[2] <= 0.0 && c.c[3] <= 0.0);
                assert!((c.c[0] + c.c[1] - 1.0).abs() <= 1e-12);
                assert!((c.c[2] + c.c[3] + 1.0).abs() <= 1e-12);
            }
        }
    }
}
