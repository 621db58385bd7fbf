//! Gradient and Jacobi preconditioner of the incremental potential.

use super::{Problem, SolverConfig};
use crate::contact::{barrier_diag_hessian_scatter, barrier_energy, barrier_gradient_scatter, ConstraintSet};
use crate::elasticity::{ElasticityError, ElementEval};
use crate::real::Real;
use nalgebra::{Matrix3x4, Vector3};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct Assembly<T: Real> {
    /// `E(x)`.
    pub energy: T,
    /// `∇E`, zero on fixed vertices.
    pub g: Vec<Vector3<T>>,
    /// Hessian diagonal before clamping.
    pub diag: Vec<Vector3<T>>,
    /// `1 / max(diag, floor·m)`.
    pub p_diag: Vec<Vector3<T>>,
    /// Per-tet state, reused by the quadratic form.
    pub evals: Vec<ElementEval<T>>,
}

/// Evaluates every tet at `x`. Results are in tet order.
pub fn evaluate_elements<T: Real>(problem: &Problem<'_, T>, x: &[Vector3<T>]) -> Result<Vec<ElementEval<T>>, ElasticityError> {
    let mesh = problem.mesh;
    (0..mesh.num_tets())
        .into_par_iter()
        .map(|e| ElementEval::new(mesh, x, e, &problem.materials[mesh.tet_object[e]]))
        .collect()
}

/// `g = M(x − x̃) + h²∇Ψ + κΣ∇b` and `P = 1/max(M + h² diag ∇²Ψ + κ Σ diag ∇²b, floor·m)`.
///
/// Per-element contributions are computed in parallel and accumulated in
/// tet order, so the result does not depend on the thread count.
pub fn assemble_gradient_and_preconditioner<T: Real>(
    problem: &Problem<'_, T>,
    x: &[Vector3<T>],
    cs: &ConstraintSet<T>,
    config: &SolverConfig,
) -> Result<Assembly<T>, ElasticityError> {
    let mesh = problem.mesh;
    let h2 = T::of(config.h * config.h);
    let evals = evaluate_elements(problem, x)?;
    let local: Vec<(Matrix3x4<T>, Matrix3x4<T>)> = evals
        .par_iter()
        .enumerate()
        .map(|(e, ev)| {
            let d = &mesh.dfdx[e];
            (ev.gradient(d), ev.diag_hessian(d))
        })
        .collect();

    let n = x.len();
    let mut g: Vec<Vector3<T>> = (0..n).map(|i| (x[i] - problem.x_tilde[i]) * mesh.mass[i]).collect();
    let mut diag: Vec<Vector3<T>> = mesh.mass.iter().map(|&m| Vector3::repeat(m)).collect();
    let mut inertia = T::zero();
    for i in 0..n {
        inertia += g[i].dot(&(x[i] - problem.x_tilde[i]));
    }
    let mut elastic = T::zero();
    for (e, (ge, de)) in local.iter().enumerate() {
        elastic += evals[e].energy;
        for (a, &v) in mesh.tets[e].iter().enumerate() {
            g[v] += ge.column(a) * h2;
            diag[v] += de.column(a) * h2;
        }
    }
    barrier_gradient_scatter(cs, &mut g);
    barrier_diag_hessian_scatter(cs, &mut diag);
    let energy = inertia * T::of(0.5) + elastic * h2 + barrier_energy(cs);

    let floor = T::of(config.preconditioner_floor);
    let p_diag = diag
        .iter()
        .zip(&mesh.mass)
        .map(|(d, &m)| d.map(|di| T::one() / di.max(floor * m)))
        .collect();
    for (gi, &fixed) in g.iter_mut().zip(problem.fixed) {
        if fixed {
            *gi = Vector3::zeros();
        }
    }
    Ok(Assembly {
        energy,
        g,
        diag,
        p_diag,
        evals,
    })
}
