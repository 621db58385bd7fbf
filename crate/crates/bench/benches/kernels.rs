//! Matrix-free element and barrier kernels against dense assembly.

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::{SVector, Vector3};
use pncg_core::contact::{
    barrier_diag_hessian_scatter, barrier_quadratic_form, compute_constraint_set, ConstraintSet, ExclusionTable,
};
use pncg_core::elasticity::{element_diag_hessian, element_quadratic_form, EnergyModel, MaterialModel};
use pncg_core::mesh::{box_grid, ObjectGeometry, TetMesh};
use pncg_core::oracle::{dense_constraint_hessian, dense_element_hessian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn perturbed_block(seed: u64) -> (TetMesh, Vec<Vector3<f64>>) {
    let mesh = TetMesh::new(box_grid([4, 4, 4], Vector3::repeat(1.0)), 1000.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = mesh
        .vertices_rest
        .iter()
        .map(|p| p + Vector3::from_fn(|_, _| rng.gen_range(-0.02..0.02)))
        .collect();
    (mesh, x)
}

fn elastic(c: &mut Criterion) {
    let (mesh, x) = perturbed_block(7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = SVector::<f64, 12>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    for model in EnergyModel::ALL {
        let m = MaterialModel::from_young_poisson(model, 1e5, 0.3).unwrap();
        let mut g = c.benchmark_group(format!("element/{model:?}"));
        g.bench_function("diag_fast", |b| {
            b.iter(|| {
                (0..mesh.num_tets())
                    .map(|t| element_diag_hessian(&mesh, &x, t, &m).unwrap().sum())
                    .sum::<f64>()
            })
        });
        g.bench_function("diag_dense", |b| {
            b.iter(|| {
                (0..mesh.num_tets())
                    .map(|t| dense_element_hessian(&mesh, &x, t, &m).unwrap().diagonal().sum())
                    .sum::<f64>()
            })
        });
        g.bench_function("quad_fast", |b| {
            b.iter(|| {
                (0..mesh.num_tets())
                    .map(|t| element_quadratic_form(&mesh, &x, t, &m, black_box(&p)).unwrap())
                    .sum::<f64>()
            })
        });
        g.bench_function("quad_dense", |b| {
            b.iter(|| {
                (0..mesh.num_tets())
                    .map(|t| dense_element_hessian(&mesh, &x, t, &m).unwrap().quadratic_form(black_box(&p)))
                    .sum::<f64>()
            })
        });
        g.finish();
    }
}

fn stacked_blocks() -> (TetMesh, ConstraintSet<f64>) {
    let a = box_grid([6, 6, 2], Vector3::new(1.0, 1.0, 0.3));
    let b = a.clone().transformed(Vector3::repeat(1.0), &nalgebra::Matrix3::identity(), Vector3::new(0.05, 0.07, 0.305));
    let mesh = TetMesh::from_objects(vec![
        ObjectGeometry { data: a, density: 1.0 },
        ObjectGeometry { data: b, density: 1.0 },
    ])
    .unwrap();
    let cs = compute_constraint_set(&mesh, &mesh.vertices_rest, 0.02, 1.0, &ExclusionTable::default(), 0.2).unwrap();
    (mesh, cs)
}

fn barrier(c: &mut Criterion) {
    let (mesh, cs) = stacked_blocks();
    let x = &mesh.vertices_rest;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p: Vec<Vector3<f64>> = (0..x.len()).map(|_| Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0))).collect();
    let mut g = c.benchmark_group(format!("barrier/{}_constraints", cs.len()));
    g.bench_function("diag_fast", |b| {
        let mut out = vec![Vector3::zeros(); x.len()];
        b.iter(|| {
            out.iter_mut().for_each(|o| *o = Vector3::zeros());
            barrier_diag_hessian_scatter(&cs, &mut out);
            black_box(out[0])
        })
    });
    g.bench_function("diag_dense", |b| {
        b.iter(|| {
            cs.constraints
                .iter()
                .map(|c| dense_constraint_hessian(c, x, cs.kappa, cs.d_hat).diagonal().sum())
                .sum::<f64>()
        })
    });
    g.bench_function("quad_fast", |b| b.iter(|| barrier_quadratic_form(&cs, black_box(&p))));
    g.bench_function("quad_dense", |b| {
        b.iter(|| {
            cs.constraints
                .iter()
                .map(|c| {
                    let h = dense_constraint_hessian(c, x, cs.kappa, cs.d_hat);
                    let local = SVector::<f64, 12>::from_fn(|i, _| p[c.verts[i / 3]][i % 3]);
                    h.quadratic_form(&local)
                })
                .sum::<f64>()
        })
    });
    g.finish();
}

criterion_group!(benches, elastic, barrier);
criterion_main!(benches);
