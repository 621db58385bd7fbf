//! The main optimization loop.

use super::assemble::assemble_gradient_and_preconditioner;
use super::beta::BetaDots;
use super::line_search::{line_search_alpha, predicted_decrease, LineSearch};
use super::partition::Partition;
use super::record::{ConvergenceRecord, IterationRecord, Termination};
use super::reduce;
use super::{Problem, SolverConfig, SolverError, Splitting};
use crate::contact::{
    compute_constraint_set, constraint_quadratic_form, ground_contact_constraints, ConstraintSet,
    ContactConstraint, ContactError, ContactKind,
};
use crate::real::Real;
use nalgebra::{Matrix3x4, Vector3};
use rayon::prelude::*;

/// Relative threshold below which `ΔE₀` counts as zero.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-14;
/// `‖g‖∞ / ‖g₀‖∞` below which the solve stops without another step.
pub const GRADIENT_VANISHED: f64 = 1e-12;
/// Maximum number of step halvings when an update inverts a tet or
/// brings two primitives into contact.
pub const MAX_HALVINGS: usize = 40;

/// Barrier constraints at `x`: self-contact pairs plus half-space contacts.
pub fn constraint_set<T: Real>(
    problem: &Problem<'_, T>,
    x: &[Vector3<T>],
    config: &SolverConfig,
) -> Result<ConstraintSet<T>, ContactError> {
    let d_hat = T::of(config.d_hat);
    let kappa = T::of(config.kappa);
    let Some(ctx) = &problem.contact else {
        return Ok(ConstraintSet::empty(kappa, d_hat));
    };
    let mut cs = if ctx.self_contact {
        compute_constraint_set(problem.mesh, x, d_hat, kappa, ctx.exclusion, T::of(ctx.cell_size))?
    } else {
        ConstraintSet::empty(kappa, d_hat)
    };
    for plane in ctx.planes {
        cs.constraints
            .extend(ground_contact_constraints(&problem.mesh.surface_vertices, x, plane, d_hat)?);
    }
    Ok(cs)
}

/// Constraint vertices that actually carry a degree of freedom.
#[inline]
fn constraint_vertices<T: Real>(c: &ContactConstraint<T>) -> &[usize] {
    if c.kind == ContactKind::Ground {
        &c.verts[..1]
    } else {
        &c.verts
    }
}

/// Per-region scalars of one iteration.
#[derive(Debug, Clone, Copy)]
struct RegionStep<T> {
    g_dot_p: T,
    p_inf: T,
    quad: T,
    search: Option<LineSearch<T>>,
}

/// Runs the preconditioned nonlinear conjugate gradient method from `x`
/// until `ΔE < ε ΔE₀` or `iter_max` iterations, updating `x` in place.
pub fn pncg_solve<T: Real>(
    problem: &Problem<'_, T>,
    config: &SolverConfig,
    x: &mut [Vector3<T>],
) -> Result<ConvergenceRecord, SolverError> {
    config.validate().map_err(SolverError::Config)?;
    problem.check(x.len())?;
    let mesh = problem.mesh;
    let n = x.len();
    let det = config.deterministic;
    let h2 = T::of(config.h * config.h);
    let d_hat = T::of(config.d_hat);
    let eps = T::of(config.epsilon);
    let check_inversion = problem.materials.iter().any(|m| m.model.requires_positive_det());

    let mut cs = constraint_set(problem, x, config).map_err(|source| SolverError::Penetration { iter: 0, source })?;
    let partition = match config.splitting {
        Splitting::Off => Partition::single(mesh),
        Splitting::PerObject => Partition::per_object(mesh),
        Splitting::CollisionPartition => Partition::collision(mesh, &cs.constraints),
    };
    let regions = partition.num_regions();
    let split = regions > 1;

    let zero3 = Vector3::<T>::zeros();
    let mut g_prev = vec![zero3; n];
    let mut p_prev = vec![zero3; n];
    let mut restart = vec![true; regions];
    let mut rows = Vec::new();
    let mut de0 = T::zero();
    let mut energy0 = T::zero();
    let mut grad0 = T::zero();
    let mut final_grad = T::zero();
    let mut termination = Termination::IterLimit;

    for iter in 0..config.iter_max {
        let asm = assemble_gradient_and_preconditioner(problem, x, &cs, config)
            .map_err(|source| SolverError::Material { iter, source })?;
        let g = &asm.g;
        let pd = &asm.p_diag;
        let grad_inf = reduce::max(n, |i| g[i].amax());
        if !grad_inf.is_finite_val() || !asm.energy.is_finite_val() {
            return Err(SolverError::NonFinite { iter, what: "gradient" });
        }
        final_grad = grad_inf;
        if iter == 0 {
            energy0 = asm.energy;
            grad0 = grad_inf;
        } else if grad_inf <= T::of(GRADIENT_VANISHED) * grad0 {
            termination = Termination::GradientVanished;
            break;
        }

        // Direction, one β per region.
        let betas: Vec<T> = (0..regions)
            .map(|r| {
                if iter == 0 || restart[r] {
                    return T::zero();
                }
                let m = &partition.members[r];
                BetaDots::from_array(reduce::sum_k(m.len(), det, |k| {
                    let i = m[k];
                    BetaDots::term(&g[i], &g_prev[i], &p_prev[i], &pd[i])
                }))
                .beta(config.beta_variant)
            })
            .collect();
        let mut p: Vec<Vector3<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if problem.fixed[i] {
                    zero3
                } else {
                    -pd[i].component_mul(&g[i]) + p_prev[i] * betas[partition.region(i)]
                }
            })
            .collect();

        let mut restart_next = vec![false; regions];
        let mut steps = Vec::with_capacity(regions);
        for r in 0..regions {
            let m = &partition.members[r];
            let mut g_dot_p = reduce::sum(m.len(), det, |k| g[m[k]].dot(&p[m[k]]));
            if g_dot_p >= T::zero() && betas[r] != T::zero() {
                // Not a descent direction: fall back to preconditioned steepest descent.
                for &i in m {
                    if !problem.fixed[i] {
                        p[i] = -pd[i].component_mul(&g[i]);
                    }
                }
                restart_next[r] = true;
                g_dot_p = reduce::sum(m.len(), det, |k| g[m[k]].dot(&p[m[k]]));
            }
            let p_inf = reduce::max(m.len(), |k| p[m[k]].amax());
            steps.push(RegionStep {
                g_dot_p,
                p_inf,
                quad: T::zero(),
                search: None,
            });
        }
        if steps.iter().all(|s| !(s.p_inf > T::zero())) {
            termination = Termination::ZeroDirection;
            break;
        }

        // pᵀHp and the step size, per region.
        for r in 0..regions {
            if !(steps[r].p_inf > T::zero()) {
                continue;
            }
            let m = &partition.members[r];
            let in_r = |v: usize| !split || partition.region(v) == r;
            let pv = |v: usize| if in_r(v) { p[v] } else { zero3 };
            let inertia = reduce::sum(m.len(), det, |k| mesh.mass[m[k]] * p[m[k]].norm_squared());
            let els = &partition.elements[r];
            let elastic = reduce::sum(els.len(), det, |k| {
                let e = els[k];
                let t = &mesh.tets[e];
                let local = Matrix3x4::from_columns(&[pv(t[0]), pv(t[1]), pv(t[2]), pv(t[3])]);
                asm.evals[e].quadratic_form(&mesh.dfdx[e], &local)
            });
            let barrier = reduce::sum(cs.constraints.len(), det, |k| {
                let c = &cs.constraints[k];
                if !constraint_vertices(c).iter().any(|&v| in_r(v)) {
                    return T::zero();
                }
                let local = if c.kind == ContactKind::Ground {
                    [pv(c.verts[0]), zero3, zero3, zero3]
                } else {
                    c.verts.map(pv)
                };
                constraint_quadratic_form(c, cs.kappa, cs.d_hat, &local)
            });
            let quad = inertia + h2 * elastic + barrier;
            if !quad.is_finite_val() || !steps[r].g_dot_p.is_finite_val() {
                return Err(SolverError::NonFinite { iter, what: "quadratic form" });
            }
            let min_curvature = T::of(config.curvature_floor) * inertia;
            steps[r].quad = quad;
            steps[r].search = line_search_alpha(steps[r].g_dot_p, quad, steps[r].p_inf, d_hat, min_curvature);
            if let Some(ls) = &steps[r].search {
                restart_next[r] |= ls.restart;
            }
        }

        let total_de = |alphas: &[T]| -> T {
            (0..regions).fold(T::zero(), |acc, r| match steps[r].search {
                Some(_) => acc + predicted_decrease(alphas[r], steps[r].g_dot_p, steps[r].quad),
                None => acc,
            })
        };
        let mut alphas: Vec<T> = steps
            .iter()
            .map(|s| s.search.map_or(T::zero(), |ls| ls.alpha))
            .collect();
        if iter == 0 {
            de0 = total_de(&alphas);
            if !de0.is_finite_val() {
                return Err(SolverError::NonFinite { iter, what: "energy decrease" });
            }
            if de0 <= T::of(FIXED_POINT_TOLERANCE) * (T::one() + energy0.abs()) {
                termination = Termination::FixedPoint;
                break;
            }
        }

        // Apply the step, halving the offending regions' α while the update
        // inverts a tet or produces a contact fault.
        let x_old = x.to_vec();
        let mut halvings = 0;
        let next_cs = loop {
            x.par_iter_mut().enumerate().for_each(|(i, xi)| {
                *xi = x_old[i] + p[i] * alphas[partition.region(i)];
            });
            let mut bad_regions = vec![false; regions];
            if check_inversion {
                let inverted: Vec<usize> = (0..mesh.num_tets())
                    .into_par_iter()
                    .filter(|&e| {
                        problem.materials[mesh.tet_object[e]].model.requires_positive_det()
                            && !(mesh.deformation_gradient(x, e).determinant() > T::zero())
                    })
                    .collect();
                for e in inverted {
                    for &v in &mesh.tets[e] {
                        bad_regions[partition.region(v)] = true;
                    }
                }
            }
            if !bad_regions.iter().any(|&b| b) {
                match constraint_set(problem, x, config) {
                    Ok(c) => break c,
                    Err(ContactError::Penetration { kind, verts, .. }) => {
                        let vs = if kind == ContactKind::Ground { &verts[..1] } else { &verts[..] };
                        for &v in vs {
                            bad_regions[partition.region(v)] = true;
                        }
                    }
                }
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                x.copy_from_slice(&x_old);
                return Err(SolverError::StepRejected { iter });
            }
            for r in 0..regions {
                if bad_regions[r] {
                    alphas[r] *= T::of(0.5);
                }
            }
        };
        if halvings > 0 {
            log::debug!("iteration {iter}: step halved {halvings} time(s)");
        }

        let de = total_de(&alphas);
        if iter == 0 {
            de0 = de;
        }
        let capped = steps.iter().any(|s| s.search.is_some_and(|ls| ls.capped));
        let max_step = (0..regions).fold(T::zero(), |acc, r| acc.max(alphas[r] * steps[r].p_inf));
        let moving: Vec<f64> = (0..regions)
            .filter(|&r| steps[r].search.is_some())
            .map(|r| alphas[r].to_f64())
            .collect();
        rows.push(IterationRecord {
            iter,
            de: de.to_f64(),
            alpha: moving.iter().copied().fold(f64::INFINITY, f64::min),
            alphas: alphas.iter().map(|a| a.to_f64()).collect(),
            grad_inf: grad_inf.to_f64(),
            n_constraints: cs.len(),
            capped,
            max_step: max_step.to_f64(),
            restart: iter > 0 && betas.iter().any(|&b| b == T::zero()),
            energy: asm.energy.to_f64(),
        });

        cs = next_cs;
        g_prev = asm.g;
        p_prev = p;
        restart = restart_next;
        if de < eps * de0 {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(ConvergenceRecord {
        rows,
        termination,
        de0: de0.to_f64(),
        energy0: energy0.to_f64(),
        grad_inf0: grad0.to_f64(),
        final_grad_inf: final_grad.to_f64(),
    })
}
