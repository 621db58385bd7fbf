//! Slow, independent reference implementations used to check the fast paths.
//!
//! Nothing in here is called by the solver. Everything runs in `f64`.

use crate::contact::{ConstraintKey, ContactConstraint, ContactKind, ExclusionTable, HalfSpace};
use crate::elasticity::{psi_derivatives_from_invariants, svd_polar, ElasticityError, MaterialModel};
use crate::mesh::TetMesh;
use nalgebra::{DMatrix, Matrix3, SMatrix, SVector, Vector2, Vector3};

pub type Matrix12 = SMatrix<f64, 12, 12>;
pub type Vector12 = SVector<f64, 12>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("energy is not finite when probing coordinate {index} (value {value})")]
    NonFinite { index: usize, value: f64 },
}

/// Central-difference gradient of `e` at `x`, with per-coordinate step
/// `rel_step·(1 + |xᵢ|)`.
pub fn fd_gradient<F>(e: F, x: &[f64], rel_step: f64) -> Result<Vec<f64>, OracleError>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = rel_step * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let ep = e(&probe);
        probe[i] = x[i] - h;
        let em = e(&probe);
        probe[i] = x[i];
        for v in [ep, em] {
            if !v.is_finite() {
                return Err(OracleError::NonFinite { index: i, value: v });
            }
        }
        g[i] = (ep - em) / (2.0 * h);
    }
    Ok(g)
}

/// Default relative step for [`fd_gradient`].
pub const FD_STEP: f64 = 1e-6;

/// A 12×12 local Hessian over the stacked coordinates of four vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLocalHessian(pub Matrix12);

impl DenseLocalHessian {
    pub fn diagonal(&self) -> Vector12 {
        self.0.diagonal()
    }

    pub fn quadratic_form(&self, p: &Vector12) -> f64 {
        (p.transpose() * self.0 * p)[0]
    }

    /// `‖H − Hᵀ‖ / ‖H‖` (0 for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        let n = self.0.norm();
        if n == 0.0 {
            0.0
        } else {
            (self.0 - self.0.transpose()).norm() / n
        }
    }
}

fn vec9(m: &Matrix3<f64>) -> SVector<f64, 9> {
    SVector::<f64, 9>::from_column_slice(m.as_slice())
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    v.cross_matrix()
}

/// `∂²I1/∂F²` as a 9×9 matrix, from the differential of the polar rotation:
/// `dR = R ω̂` with `(tr S·I − S) ω = vee(RᵀdF − dFᵀR)`.
fn i1_hessian(f: &Matrix3<f64>) -> SMatrix<f64, 9, 9> {
    let inv = svd_polar(f);
    let r = inv.r;
    let s = r.transpose() * f;
    let s = (s + s.transpose()) * 0.5;
    let a = Matrix3::identity() * s.trace() - s;
    let a_inv = a.try_inverse().unwrap_or_else(Matrix3::zeros);
    let mut h = SMatrix::<f64, 9, 9>::zeros();
    for col in 0..9 {
        let mut df = Matrix3::zeros();
        df[(col % 3, col / 3)] = 1.0;
        let k = r.transpose() * df - df.transpose() * r;
        let w = a_inv * Vector3::new(k[(2, 1)], k[(0, 2)], k[(1, 0)]);
        h.set_column(col, &vec9(&(r * skew(&w))));
    }
    h
}

/// `∂²I3/∂F²` in block form: blocks `(a, b)` of `±f̂ₖ` over the columns of `F`.
fn i3_hessian(f: &Matrix3<f64>) -> SMatrix<f64, 9, 9> {
    let c = |k: usize| -> Vector3<f64> { f.column(k).into() };
    let mut h = SMatrix::<f64, 9, 9>::zeros();
    let blocks = [(0, 1, -skew(&c(2))), (0, 2, skew(&c(1))), (1, 2, -skew(&c(0)))];
    for (a, b, m) in blocks {
        h.fixed_view_mut::<3, 3>(3 * a, 3 * b).copy_from(&m);
        h.fixed_view_mut::<3, 3>(3 * b, 3 * a).copy_from(&m.transpose());
    }
    h
}

/// `∂²(V·Ψ)/∂F²` assembled densely from invariant gradients and Hessians.
pub fn dense_stress_derivative(f: &Matrix3<f64>, material: &MaterialModel) -> Result<SMatrix<f64, 9, 9>, ElasticityError> {
    let i3 = f.determinant();
    let der = psi_derivatives_from_invariants::<f64>(material, i3)
        .ok_or(ElasticityError::Inverted { tet: usize::MAX, det: i3 })?;
    let g2 = vec9(&(f * 2.0));
    let cof = Matrix3::from_columns(&[
        f.column(1).cross(&f.column(2)),
        f.column(2).cross(&f.column(0)),
        f.column(0).cross(&f.column(1)),
    ]);
    let g3 = vec9(&cof);
    let mut h = g2 * g2.transpose() * der.dd[1]
        + g3 * g3.transpose() * der.dd[2]
        + SMatrix::<f64, 9, 9>::identity() * (2.0 * der.d[1])
        + i3_hessian(f) * der.d[2];
    if material.model.uses_i1() {
        let g1 = vec9(&svd_polar(f).r);
        h += g1 * g1.transpose() * der.dd[0] + i1_hessian(f) * der.d[0];
    }
    Ok(h)
}

/// `dFdxᵀ · ∂²(VΨ)/∂F² · dFdx` for one tet.
pub fn dense_element_hessian(
    mesh: &TetMesh<f64>,
    x: &[Vector3<f64>],
    tet: usize,
    material: &MaterialModel,
) -> Result<DenseLocalHessian, ElasticityError> {
    let f = mesh.deformation_gradient(x, tet);
    let b = mesh.dfdx_dense(tet);
    let h = dense_stress_derivative(&f, material).map_err(|e| match e {
        ElasticityError::Inverted { det, .. } => ElasticityError::Inverted { tet, det },
        other => other,
    })?;
    Ok(DenseLocalHessian(b.transpose() * h * b * mesh.rest_volume[tet]))
}

/// `κ (b'' ∇d ∇dᵀ + b' ∇²d)` with the coefficients `c` frozen, positions taken from `x`.
pub fn dense_constraint_hessian(
    c: &ContactConstraint<f64>,
    x: &[Vector3<f64>],
    kappa: f64,
    d_hat: f64,
) -> DenseLocalHessian {
    let (t, d) = if c.kind == ContactKind::Ground {
        (c.t, c.d)
    } else {
        let t: Vector3<f64> = (0..4).map(|i| x[c.verts[i]] * c.c[i]).sum();
        (t, t.norm())
    };
    // J: 3×12 with blocks cᵢ I, so t = J x_local.
    let mut j = SMatrix::<f64, 3, 12>::zeros();
    let active = if c.kind == ContactKind::Ground { 1 } else { 4 };
    for i in 0..active {
        j.fixed_view_mut::<3, 3>(0, 3 * i).copy_from(&(Matrix3::identity() * c.c[i]));
    }
    let n = t / d;
    let grad_d = j.transpose() * n;
    let hess_d = if c.kind == ContactKind::Ground {
        Matrix12::zeros()
    } else {
        j.transpose() * (Matrix3::identity() - n * n.transpose()) * j / d
    };
    // Barrier derivatives written out independently of the contact module.
    let l = (d / d_hat).ln();
    let b1 = -2.0 * (d - d_hat) * l - (d - d_hat).powi(2) / d;
    let b2 = -2.0 * l - 4.0 * (d - d_hat) / d + ((d - d_hat) / d).powi(2);
    DenseLocalHessian((grad_d * grad_d.transpose() * b2 + hess_d * b1) * kappa)
}

/// Primitive pair accepted by [`brute_force_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// `x0` against triangle `(x1, x2, x3)`.
    PointTriangle,
    /// Segment `x0–x1` against segment `x2–x3`.
    EdgeEdge,
}

/// Minimum distance between two primitives by dense grid sampling of the
/// parameter domain followed by a compass search from the best sample.
pub fn brute_force_distance(kind: PairKind, x: [Vector3<f64>; 4], grid_n: usize) -> f64 {
    assert!(grid_n >= 100, "grid_n must be at least 100");
    let dist = |s: Vector2<f64>| -> f64 {
        match kind {
            PairKind::PointTriangle => (x[0] - (x[1] + (x[2] - x[1]) * s.x + (x[3] - x[1]) * s.y)).norm(),
            PairKind::EdgeEdge => ((x[0] + (x[1] - x[0]) * s.x) - (x[2] + (x[3] - x[2]) * s.y)).norm(),
        }
    };
    let feasible = |s: &Vector2<f64>| -> bool {
        match kind {
            PairKind::PointTriangle => s.x >= 0.0 && s.y >= 0.0 && s.x + s.y <= 1.0,
            PairKind::EdgeEdge => (0.0..=1.0).contains(&s.x) && (0.0..=1.0).contains(&s.y),
        }
    };

    let step = 1.0 / grid_n as f64;
    let mut best = (f64::INFINITY, Vector2::zeros());
    for i in 0..=grid_n {
        for j in 0..=grid_n {
            let s = Vector2::new(i as f64 * step, j as f64 * step);
            if kind == PairKind::PointTriangle && i + j > grid_n {
                continue;
            }
            let d = dist(s);
            if d < best.0 {
                best = (d, s);
            }
        }
    }

    // Poll along the axes, the diagonals and the principal directions of the
    // parametrization. The last pair keeps the search from stalling in the
    // narrow valleys of slivers and nearly parallel edges.
    let (ja, jb) = match kind {
        PairKind::PointTriangle => (x[2] - x[1], x[3] - x[1]),
        PairKind::EdgeEdge => (x[1] - x[0], x[2] - x[3]),
    };
    let jtj = nalgebra::Matrix2::new(ja.dot(&ja), ja.dot(&jb), ja.dot(&jb), jb.dot(&jb));
    let eig = jtj.symmetric_eigen();
    let (e0, e1): (Vector2<f64>, Vector2<f64>) = (eig.eigenvectors.column(0).into(), eig.eigenvectors.column(1).into());
    let dirs = [
        Vector2::new(1.0, 0.0),
        Vector2::new(-1.0, 0.0),
        Vector2::new(0.0, 1.0),
        Vector2::new(0.0, -1.0),
        Vector2::new(1.0, -1.0),
        Vector2::new(-1.0, 1.0),
        Vector2::new(1.0, 1.0),
        Vector2::new(-1.0, -1.0),
        e0,
        -e0,
        e1,
        -e1,
    ];
    let (mut fbest, mut s) = best;
    let mut h = step;
    let mut evals = 0usize;
    while h > 1e-16 && evals < 200_000 {
        let mut improved = false;
        for dir in &dirs {
            let cand = s + dir * h;
            if !feasible(&cand) {
                continue;
            }
            evals += 1;
            let f = dist(cand);
            if f < fbest {
                fbest = f;
                s = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    fbest
}

/// Every vertex–triangle and edge–edge pair of the surface that shares no
/// vertex, is closer than `d_hat` and is not excluded, found by plain
/// enumeration. Sorted by key.
pub fn all_pairs_constraints(
    mesh: &TetMesh<f64>,
    x: &[Vector3<f64>],
    d_hat: f64,
    exclusion: &ExclusionTable,
) -> Vec<(ConstraintKey, f64)> {
    let mut out = Vec::new();
    for &v in &mesh.surface_vertices {
        for f in &mesh.surface_faces {
            if f.contains(&v) {
                continue;
            }
            let key = ConstraintKey::new(ContactKind::PointTriangle, [v, f[0], f[1], f[2]]);
            let d = brute_force_distance(PairKind::PointTriangle, [x[v], x[f[0]], x[f[1]], x[f[2]]], 100);
            if d < d_hat && !exclusion.contains(&key) {
                out.push((key, d));
            }
        }
    }
    let edges = &mesh.surface_edges;
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            if a.contains(&b[0]) || a.contains(&b[1]) {
                continue;
            }
            let key = ConstraintKey::new(ContactKind::EdgeEdge, [a[0], a[1], b[0], b[1]]);
            let d = brute_force_distance(PairKind::EdgeEdge, [x[a[0]], x[a[1]], x[b[0]], x[b[1]]], 100);
            if d < d_hat && !exclusion.contains(&key) {
                out.push((key, d));
            }
        }
    }
    out.sort_by_key(|a| a.0);
    out
}

/// Total incremental potential `½(x−x̃)ᵀM(x−x̃) + h²Σ VΨ + κΣ b(d)` evaluated
/// from scratch: distances by brute force over all pairs within `d_hat`,
/// half-spaces by signed distance.
#[allow(clippy::too_many_arguments)]
pub fn reference_energy(
    mesh: &TetMesh<f64>,
    materials: &[MaterialModel],
    x: &[Vector3<f64>],
    x_tilde: &[Vector3<f64>],
    h: f64,
    kappa: f64,
    d_hat: f64,
    exclusion: &ExclusionTable,
    planes: &[HalfSpace],
) -> f64 {
    let inertia: f64 = (0..x.len())
        .map(|i| 0.5 * mesh.mass[i] * (x[i] - x_tilde[i]).norm_squared())
        .sum();
    let elastic: f64 = (0..mesh.num_tets())
        .map(|e| {
            let m = &materials[mesh.tet_object[e]];
            let f = mesh.deformation_gradient(x, e);
            let inv = svd_polar(&f);
            let psi = crate::elasticity::psi(m, &inv).unwrap_or(f64::INFINITY);
            mesh.rest_volume[e] * psi
        })
        .sum();
    let b = |d: f64| -> f64 {
        if d >= d_hat {
            0.0
        } else if d <= 0.0 {
            f64::INFINITY
        } else {
            -(d - d_hat).powi(2) * (d / d_hat).ln()
        }
    };
    let contact: f64 = all_pairs_constraints(mesh, x, d_hat, exclusion)
        .iter()
        .map(|(_, d)| b(*d))
        .sum::<f64>()
        + planes
            .iter()
            .flat_map(|p| mesh.surface_vertices.iter().map(move |&v| p.signed_distance(&x[v])))
            .map(b)
            .sum::<f64>();
    inertia + h * h * elastic + kappa * contact
}

/// Dense global Hessian `M + h²ΣH_e + κΣH_c` for small meshes.
pub fn dense_global_hessian(
    mesh: &TetMesh<f64>,
    materials: &[MaterialModel],
    x: &[Vector3<f64>],
    h: f64,
    constraints: &[ContactConstraint<f64>],
    kappa: f64,
    d_hat: f64,
) -> Result<DMatrix<f64>, ElasticityError> {
    let n = 3 * x.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..x.len() {
        for k in 0..3 {
            out[(3 * i + k, 3 * i + k)] = mesh.mass[i];
        }
    }
    let mut add = |verts: &[usize], local: &Matrix12, scale: f64| {
        for (a, &va) in verts.iter().enumerate() {
            for (b, &vb) in verts.iter().enumerate() {
                for r in 0..3 {
                    for c in 0..3 {
                        out[(3 * va + r, 3 * vb + c)] += scale * local[(3 * a + r, 3 * b + c)];
                    }
                }
            }
        }
    };
    for e in 0..mesh.num_tets() {
        let he = dense_element_hessian(mesh, x, e, &materials[mesh.tet_object[e]])?;
        add(&mesh.tets[e], &he.0, h * h);
    }
    for c in constraints {
        let hc = dense_constraint_hessian(c, x, kappa, d_hat);
        if c.kind == ContactKind::Ground {
            add(&c.verts[..1], &hc.0, 1.0);
        } else {
            add(&c.verts, &hc.0, 1.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::{det_hessian_quadratic, EnergyModel};

    #[test]
    fn fd_is_exact_on_quadratics() {
        let e = |x: &[f64]| 0.5 * x[0] * x[0] + 3.0 * x[0] * x[1] - 2.0 * x[1] * x[1] + x[1];
        let x = [0.7, -1.3];
        let g = fd_gradient(e, &x, FD_STEP).unwrap();
        assert!((g[0] - (0.7 + 3.0 * -1.3)).abs() < 1e-9);
        assert!((g[1] - (3.0 * 0.7 + 4.0 * 1.3 + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn fd_reports_non_finite_coordinate() {
        let e = |x: &[f64]| if x[1] > 1.0 { f64::NAN } else { x[0] };
        let err = fd_gradient(e, &[0.0, 1.0], FD_STEP).unwrap_err();
        assert!(matches!(err, OracleError::NonFinite { index: 1, .. }));
    }

    #[test]
    fn i3_block_form_matches_polynomial() {
        let f = Matrix3::new(1.1, 0.2, -0.3, 0.05, 0.9, 0.4, -0.2, 0.1, 1.3);
        let w = Matrix3::new(0.3, -0.7, 0.2, 0.5, 0.1, -0.4, 0.9, 0.6, -0.2);
        let wv = vec9(&w);
        let q = (wv.transpose() * i3_hessian(&f) * wv)[0];
        assert!((q - det_hessian_quadratic(&f, &w)).abs() < 1e-12);
    }

    #[test]
    fn i1_hessian_matches_rotation_differences() {
        let f = Matrix3::new(1.1, 0.2, -0.3, 0.05, 0.9, 0.4, -0.2, 0.1, 1.3);
        let h = i1_hessian(&f);
        let eps = 1e-6;
        for col in 0..9 {
            let mut df = Matrix3::zeros();
            df[(col % 3, col / 3)] = eps;
            let fd = (svd_polar(&(f + df)).r - svd_polar(&(f - df)).r) / (2.0 * eps);
            assert!((vec9(&fd) - h.column(col)).norm() < 1e-7);
        }
    }

    #[test]
    fn brute_force_reference_cases() {
        let z = Vector3::zeros();
        let pt = brute_force_distance(
            PairKind::PointTriangle,
            [Vector3::new(0.2, 0.2, 0.5), z, Vector3::x(), Vector3::y()],
            100,
        );
        assert!((pt - 0.5).abs() < 1e-9);
        let ee = brute_force_distance(
            PairKind::EdgeEdge,
            [
                Vector3::new(-1.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, -1.0, 0.3),
                Vector3::new(0.0, 1.0, 0.3),
            ],
            100,
        );
        assert!((ee - 0.3).abs() < 1e-9);
    }

    #[test]
    fn dense_hessian_is_symmetric() {
        let mesh = TetMesh::new(crate::mesh::unit_tet(), 1.0).unwrap();
        let x: Vec<_> = mesh.vertices_rest.iter().map(|v| Vector3::new(1.2 * v.x + 0.1 * v.y, v.y, 0.9 * v.z)).collect();
        for model in EnergyModel::ALL {
            let m = MaterialModel::new(model, 1.0, 2.0).unwrap();
            let h = dense_element_hessian(&mesh, &x, 0, &m).unwrap();
            assert!(h.asymmetry() < 1e-10, "{model:?}");
        }
    }
}
