//! Matrix-free interior-point elastodynamics.
//!
//! Each time step minimizes the incremental potential
//! `½‖x − x̃‖²_M + h²Ψ(x) + κ Σ b(d_k(x))` with a Jacobi-preconditioned
//! nonlinear conjugate gradient method. Hessians are never assembled: the
//! solver only needs their diagonals and quadratic forms `pᵀHp`, both of
//! which are evaluated element by element and constraint by constraint.

// `!(a < b)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod elasticity;
pub mod mesh;
pub mod oracle;
pub mod real;
pub mod sim;
pub mod solver;

pub use real::Real;
