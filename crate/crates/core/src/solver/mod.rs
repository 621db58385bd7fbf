//! Preconditioned nonlinear conjugate gradient minimization of the
//! incremental potential.
//!
//! Each iteration rebuilds the contact constraint set, assembles the
//! gradient and the inverse Hessian diagonal, forms the conjugate
//! direction `p = −Pg + βp_prev`, and takes the Newton step along `p`,
//! `α = min(−gᵀp / pᵀHp, d̂ / (2‖p‖∞))`. No line search is performed and
//! no Hessian is ever assembled.

mod assemble;
mod beta;
mod config;
mod line_search;
mod partition;
mod pncg;
mod record;
pub mod reduce;

pub use assemble::{assemble_gradient_and_preconditioner, evaluate_elements, Assembly};
pub use beta::{beta_baseline, beta_dk, BetaDots, RESTART_THRESHOLD};
pub use config::{default_curvature_floor, default_preconditioner_floor, BetaVariant, SolverConfig, Splitting};
pub use line_search::{line_search_alpha, predicted_decrease, step_cap, LineSearch};
pub use partition::Partition;
pub use pncg::{constraint_set, pncg_solve, FIXED_POINT_TOLERANCE, GRADIENT_VANISHED, MAX_HALVINGS};
pub use record::{ConvergenceRecord, IterationRecord, Termination, CSV_HEADER};

use crate::contact::{ContactError, ExclusionTable, HalfSpace};
use crate::elasticity::{ElasticityError, MaterialModel};
use crate::mesh::TetMesh;
use crate::real::Real;
use nalgebra::Vector3;

/// Contact inputs shared by every iteration of a solve.
#[derive(Debug, Clone, Copy)]
pub struct ContactContext<'a> {
    pub exclusion: &'a ExclusionTable,
    /// Broad-phase cell size.
    pub cell_size: f64,
    /// Half-space obstacles at their end-of-step position.
    pub planes: &'a [HalfSpace],
    /// Detect surface–surface contact (between and within objects).
    pub self_contact: bool,
}

/// One time step's minimization problem.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a, T: Real> {
    pub mesh: &'a TetMesh<T>,
    /// Material of each object.
    pub materials: &'a [MaterialModel],
    /// Inertia target `x + hv + h²g`, with prescribed vertices at their targets.
    pub x_tilde: &'a [Vector3<T>],
    /// Vertices whose position is prescribed for this step.
    pub fixed: &'a [bool],
    pub contact: Option<ContactContext<'a>>,
}

impl<T: Real> Problem<'_, T> {
    fn check(&self, n: usize) -> Result<(), SolverError> {
        let nv = self.mesh.num_vertices();
        if n != nv || self.x_tilde.len() != nv || self.fixed.len() != nv {
            return Err(SolverError::Config(format!(
                "array lengths disagree: mesh {nv}, x {n}, x_tilde {}, fixed {}",
                self.x_tilde.len(),
                self.fixed.len()
            )));
        }
        if self.materials.len() < self.mesh.num_objects() {
            return Err(SolverError::Config(format!(
                "{} materials for {} objects",
                self.materials.len(),
                self.mesh.num_objects()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver input: {0}")]
    Config(String),
    #[error("iteration {iter}: {source}")]
    Material { iter: usize, source: ElasticityError },
    #[error("iteration {iter}: {source}")]
    Penetration { iter: usize, source: ContactError },
    #[error("iteration {iter}: non-finite {what}")]
    NonFinite { iter: usize, what: &'static str },
    #[error("iteration {iter}: no admissible step after {MAX_HALVINGS} halvings")]
    StepRejected { iter: usize },
}

/// Independent step sizes per region from region-restricted `gᵀp`,
/// `‖p‖∞` and the given per-region `pᵀHp`. Empty or motionless regions
/// give `None`.
pub fn split_directions<T: Real>(
    partition: &Partition,
    g: &[Vector3<T>],
    p: &[Vector3<T>],
    quads: &[T],
    d_hat: T,
) -> Vec<Option<LineSearch<T>>> {
    (0..partition.num_regions())
        .map(|r| {
            let m = &partition.members[r];
            let gp = reduce::sum(m.len(), true, |k| g[m[k]].dot(&p[m[k]]));
            let p_inf = reduce::max(m.len(), |k| p[m[k]].amax());
            line_search_alpha(gp, quads[r], p_inf, d_hat, T::zero())
        })
        .collect()
}
