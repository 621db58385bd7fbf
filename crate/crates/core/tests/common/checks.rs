//! Oracle comparisons shared by the core suites and the acceptance run.
#![allow(dead_code)]

use super::{deformation_gradient, deformed_tet, edge_edge, point_triangle, rng, unit_vector, Shape, SHAPES};
use nalgebra::{SVector, Vector3};
use pncg_core::contact::{
    barrier_diag_hessian_scatter, barrier_quadratic_form, build_exclusion_table, closest_point_edge_edge,
    closest_point_triangle, ConstraintSet, ContactConstraint, ContactKind, HalfSpace,
};
use pncg_core::elasticity::{
    element_diag_hessian, element_energy, element_gradient, element_quadratic_form, EnergyModel, MaterialModel,
};
use pncg_core::mesh::{box_grid, MeshData, ObjectGeometry, TetMesh};
use pncg_core::oracle::{
    brute_force_distance, dense_constraint_hessian, dense_element_hessian, fd_gradient, PairKind, FD_STEP,
};
use pncg_core::solver::{pncg_solve, ContactContext, ConvergenceRecord, Problem, SolverConfig, Splitting};
use rand::Rng;

pub const GRAVITY: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);

pub const SAMPLES: usize = 1000;

pub fn material(model: EnergyModel) -> MaterialModel {
    MaterialModel::from_young_poisson(model, 1e5, 0.35).unwrap()
}

pub fn stacked(x: &[nalgebra::Vector3<f64>]) -> Vec<f64> {
    x.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

pub fn unstacked(s: &[f64]) -> Vec<nalgebra::Vector3<f64>> {
    s.chunks(3).map(|c| nalgebra::Vector3::new(c[0], c[1], c[2])).collect()
}

/// Worst relative error of the analytic gradient against central differences.
pub fn gradient_fd_error(model: EnergyModel, seed: u64, samples: usize) -> f64 {
    let m = material(model);
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = deformation_gradient(&mut r, 10.0);
        let (mesh, x) = deformed_tet(&mut r, &f);
        let g = element_gradient(&mesh, &x, 0, &m).unwrap();
        let fd = fd_gradient(|s| element_energy(&mesh, &unstacked(s), 0, &m).unwrap(), &stacked(&x), FD_STEP).unwrap();
        let fd = SVector::<f64, 12>::from_column_slice(&fd);
        worst = worst.max((g - fd).norm() / g.norm().max(fd.norm()));
    }
    worst
}

/// Worst relative errors of the fast diagonal and quadratic form against
/// the dense element Hessian.
pub fn fast_path_errors(model: EnergyModel, seed: u64, samples: usize) -> (f64, f64) {
    let m = material(model);
    let mut r = rng(seed);
    let (mut wd, mut wq): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let f = deformation_gradient(&mut r, 10.0);
        let (mesh, x) = deformed_tet(&mut r, &f);
        let dense = dense_element_hessian(&mesh, &x, 0, &m).unwrap();
        let diag = element_diag_hessian(&mesh, &x, 0, &m).unwrap();
        let dd = dense.diagonal();
        wd = wd.max((diag - dd).norm() / dd.norm());
        let p = SVector::<f64, 12>::from_fn(|_, _| r.gen_range(-1.0..1.0));
        let q = element_quadratic_form(&mesh, &x, 0, &m, &p).unwrap();
        let qd = dense.quadratic_form(&p);
        // Relative to the form's scale so indefinite samples near qd = 0 are not amplified.
        let scale = qd.abs().max(dense.0.norm() * p.norm_squared() * 1e-2);
        wq = wq.max((q - qd).abs() / scale);
    }
    (wd, wq)
}

pub fn constraint(kind: ContactKind, x: &[Vector3<f64>; 4]) -> Option<ContactConstraint<f64>> {
    let cp = match kind {
        ContactKind::PointTriangle => closest_point_triangle(&x[0], &x[1], &x[2], &x[3]),
        ContactKind::EdgeEdge => closest_point_edge_edge(&x[0], &x[1], &x[2], &x[3]),
        ContactKind::Ground => unreachable!(),
    }?;
    Some(ContactConstraint { kind, verts: [0, 1, 2, 3], c: cp.c, t: cp.t, d: cp.d })
}

/// Worst absolute distance error over `samples` configurations cycling
/// through every shape class.
pub fn distance_error(seed: u64, samples: usize) -> (f64, usize) {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..samples {
        let shape = SHAPES[i % SHAPES.len()];
        let (kind, pk, x) = if i % 2 == 0 {
            (ContactKind::PointTriangle, PairKind::PointTriangle, point_triangle(&mut r, shape))
        } else {
            (ContactKind::EdgeEdge, PairKind::EdgeEdge, edge_edge(&mut r, shape))
        };
        let Some(c) = constraint(kind, &x) else { continue };
        let brute = brute_force_distance(pk, x, 100);
        worst = worst.max((c.d - brute).abs());
        checked += 1;
    }
    (worst, checked)
}

/// Worst relative errors of the barrier diagonal and quadratic form
/// against the dense constraint Hessian.
pub fn barrier_fast_path_errors(seed: u64, samples: usize) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut wd, mut wq): (f64, f64) = (0.0, 0.0);
    let mut done = 0;
    let mut i = 0;
    while done < samples {
        i += 1;
        let shape = [Shape::Generic, Shape::Boundary, Shape::VeryClose][i % 3];
        let (kind, x) = match i % 3 {
            0 => (ContactKind::PointTriangle, point_triangle(&mut r, shape)),
            1 => (ContactKind::EdgeEdge, edge_edge(&mut r, shape)),
            _ => {
                // Ground: vertex 0 above a plane through the origin.
                let n = unit_vector(&mut r);
                let d = r.gen_range(1e-4..0.5);
                let p = n * d;
                let c = ContactConstraint { kind: ContactKind::Ground, verts: [0; 4], c: [1.0, 0.0, 0.0, 0.0], t: n * d, d };
                let x = [p, p, p, p];
                check(&mut r, c, &x, &mut wd, &mut wq);
                done += 1;
                continue;
            }
        };
        let Some(c) = constraint(kind, &x) else { continue };
        check(&mut r, c, &x, &mut wd, &mut wq);
        done += 1;
    }
    (wd, wq)
}

fn check(r: &mut impl Rng, c: ContactConstraint<f64>, x: &[Vector3<f64>; 4], wd: &mut f64, wq: &mut f64) {
    let d_hat = c.d * r.gen_range(1.05..5.0);
    let kappa = 10f64.powf(r.gen_range(-3.0..3.0));
    let cs = ConstraintSet { constraints: vec![c], kappa, d_hat, skipped_degenerate: 0 };
    let n = if c.kind == ContactKind::Ground { 1 } else { 4 };
    let dense = dense_constraint_hessian(&c, x, kappa, d_hat);
    let dd = dense.diagonal();
    let mut diag = vec![Vector3::zeros(); 4];
    barrier_diag_hessian_scatter(&cs, &mut diag);
    let fast = SVector::<f64, 12>::from_fn(|k, _| if k / 3 < n { diag[k / 3][k % 3] } else { 0.0 });
    *wd = wd.max((fast - dd).norm() / dd.norm());

    let p: Vec<Vector3<f64>> = (0..4).map(|_| Vector3::from_fn(|_, _| r.gen_range(-1.0..1.0))).collect();
    let local = SVector::<f64, 12>::from_fn(|k, _| if k / 3 < n { p[k / 3][k % 3] } else { 0.0 });
    let q = barrier_quadratic_form(&cs, &p);
    let qd = dense.quadratic_form(&local);
    let scale = qd.abs().max(dense.0.norm() * local.norm_squared() * 1e-2);
    *wq = wq.max((q - qd).abs() / scale);
}

/// Point masses with no elements.
pub fn particles(positions: Vec<Vector3<f64>>, mass: f64) -> TetMesh {
    let n = positions.len();
    TetMesh {
        vertices_rest: positions,
        tets: Vec::new(),
        surface_faces: Vec::new(),
        surface_edges: Vec::new(),
        surface_vertices: Vec::new(),
        dm_inv: Vec::new(),
        rest_volume: Vec::new(),
        dfdx: Vec::new(),
        mass: vec![mass; n],
        vertex_object: vec![0; n],
        tet_object: Vec::new(),
        object_vertices: std::iter::once(0..n).collect(),
        non_manifold_edges: 0,
    }
}

/// Solves the inertia-only problem toward a random target. Returns the
/// record and the largest coordinate error against the target.
pub fn inertia_only_solve(seed: u64) -> (ConvergenceRecord, f64) {
    let mut r = rng(seed);
    let x0: Vec<Vector3<f64>> = (0..20).map(|_| Vector3::from_fn(|_, _| r.gen_range(-1.0..1.0))).collect();
    let target: Vec<Vector3<f64>> = x0.iter().map(|p| p + Vector3::from_fn(|_, _| r.gen_range(-0.5..0.5))).collect();
    let mesh = particles(x0.clone(), 0.7);
    let fixed = vec![false; x0.len()];
    let materials = [material(EnergyModel::NeoHookean)];
    let problem = Problem { mesh: &mesh, materials: &materials, x_tilde: &target, fixed: &fixed, contact: None };
    let config = SolverConfig { d_hat: 10.0, epsilon: 1e-9, deterministic: true, ..Default::default() };
    let mut x = x0;
    let rec = pncg_solve(&problem, &config, &mut x).unwrap();
    let residual = x.iter().zip(&target).fold(0.0f64, |m, (a, b)| m.max((a - b).amax()));
    (rec, residual)
}

pub fn cube(size: f64, at: Vector3<f64>) -> MeshData {
    box_grid([1, 1, 1], Vector3::repeat(size)).transformed(Vector3::repeat(1.0), &nalgebra::Matrix3::identity(), at)
}

/// One step of a spinning free cube next to a cube resting on the ground,
/// solved with per-object splitting, and the same step with the free cube
/// alone. Returns both records; the free cube is region 1 in the first
/// and region 0 in the second.
pub fn split_versus_solo() -> (ConvergenceRecord, ConvergenceRecord) {
    let free = cube(0.1, Vector3::new(0.3, 0.0, 0.5));
    let resting = cube(0.1, Vector3::new(0.0, 0.0, 0.003));
    let both = TetMesh::from_objects(vec![
        ObjectGeometry { data: resting, density: 1000.0 },
        ObjectGeometry { data: free.clone(), density: 1000.0 },
    ])
    .unwrap();
    let solo = TetMesh::new(free, 1000.0).unwrap();
    let planes = [HalfSpace::new(Vector3::zeros(), Vector3::z())];
    let config = SolverConfig {
        h: 0.01,
        d_hat: 0.01,
        kappa: 1.0,
        epsilon: 1e-9,
        iter_max: 60,
        splitting: Splitting::PerObject,
        deterministic: true,
        ..Default::default()
    };
    let materials = vec![material(EnergyModel::NeoHookean); 2];
    let h = config.h;
    let run = |mesh: &TetMesh| {
        let exclusion = build_exclusion_table(mesh, config.d_hat, 0.05);
        let centre = Vector3::new(0.35, 0.05, 0.55);
        let x_tilde: Vec<Vector3<f64>> = mesh
            .vertices_rest
            .iter()
            .map(|p| {
                let spin = if p.z > 0.3 { Vector3::new(0.0, 0.0, 3.0).cross(&(p - centre)) } else { Vector3::zeros() };
                p + spin * h + GRAVITY * h * h
            })
            .collect();
        let fixed = vec![false; mesh.num_vertices()];
        let ctx = ContactContext { exclusion: &exclusion, cell_size: 0.05, planes: &planes, self_contact: true };
        let problem = Problem { mesh, materials: &materials, x_tilde: &x_tilde, fixed: &fixed, contact: Some(ctx) };
        let mut x = mesh.vertices_rest.clone();
        pncg_solve(&problem, &config, &mut x).unwrap()
    };
    (run(&both), run(&solo))
}

/// Largest relative difference between the free body's per-iteration step
/// sizes in the split and solo runs, and the number of iterations compared.
pub fn split_alpha_error(split: &ConvergenceRecord, solo: &ConvergenceRecord) -> (f64, usize) {
    let n = split.iterations().min(solo.iterations());
    let worst = (0..n).fold(0.0f64, |m, k| {
        let a = split.rows[k].alphas[1];
        let b = solo.rows[k].alphas[0];
        m.max((a - b).abs() / b.abs())
    });
    (worst, n)
}
