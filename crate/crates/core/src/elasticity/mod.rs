//! Invariant-based hyperelasticity.
//!
//! Every supported energy is a function of `I1 = tr(S)`, `I2 = ‖F‖²` and
//! `I3 = det F` without mixed second derivatives, so the element Hessian
//! splits into six terms
//!
//! ```text
//! ∂²Ψ/∂x² = Σᵢ ∂²Ψ/∂Iᵢ² · Bᵀ gᵢ gᵢᵀ B  +  ∂Ψ/∂Iᵢ · Bᵀ Hᵢ B,      B = ∂vec(F)/∂x
//! ```
//!
//! and its diagonal and quadratic form can be evaluated term by term from
//! `W = dF(p)` and `G Dᵀ` products without ever forming a 9×9 or 12×12 matrix.

mod invariants;
mod kernels;
mod material;

pub use invariants::{
    cofactor, det_hessian_quadratic, invariant_gradients, svd_polar, twist_modes,
    InvariantGradients, InvariantState, TwistModes, TWIST_DENOMINATOR_FLOOR,
};
pub use kernels::{
    element_diag_hessian, element_energy, element_gradient, element_quadratic_form, ElementEval,
};
pub use material::{
    psi_derivatives_from_invariants, psi_from_invariants, ElasticityError, EnergyModel,
    MaterialModel, PsiDerivatives,
};

use crate::real::Real;

/// Energy density Ψ at an invariant state.
pub fn psi<T: Real>(m: &MaterialModel, inv: &InvariantState<T>) -> Result<T, ElasticityError> {
    psi_from_invariants(m, inv.i1, inv.i2, inv.i3).ok_or(ElasticityError::Inverted {
        tet: usize::MAX,
        det: inv.i3.to_f64(),
    })
}

/// `∂Ψ/∂Iᵢ` and `∂²Ψ/∂Iᵢ²` at an invariant state.
pub fn psi_derivatives<T: Real>(
    m: &MaterialModel,
    inv: &InvariantState<T>,
) -> Result<PsiDerivatives<T>, ElasticityError> {
    psi_derivatives_from_invariants(m, inv.i3).ok_or(ElasticityError::Inverted {
        tet: usize::MAX,
        det: inv.i3.to_f64(),
    })
}
