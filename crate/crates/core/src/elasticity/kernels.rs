//! Per-tet energy, gradient, Hessian diagonal and Hessian quadratic form.

use super::invariants::{cofactor, det_hessian_quadratic, svd_polar, twist_modes, TwistModes};
use super::material::{
    psi_derivatives_from_invariants, psi_from_invariants, ElasticityError, MaterialModel,
};
use crate::mesh::TetMesh;
use crate::real::Real;
use nalgebra::{Matrix3, Matrix3x4, Matrix4x3, SVector, Vector3};

/// Everything needed to evaluate one tet's derivatives at a fixed `x`.
///
/// Built once per solver iteration and reused for the gradient, the
/// preconditioner diagonal and the line-search quadratic form.
#[derive(Debug, Clone)]
pub struct ElementEval<T: Real> {
    /// `V · Ψ`.
    pub energy: T,
    pub volume: T,
    pub f: Matrix3<T>,
    /// `∂Ψ/∂Iᵢ`.
    pub d: [T; 3],
    /// `∂²Ψ/∂Iᵢ²`.
    pub dd: [T; 3],
    /// `R` from the polar decomposition; only present when Ψ uses `I1`.
    pub rotation: Option<Matrix3<T>>,
    pub twist: Option<TwistModes<T>>,
    pub cof: Matrix3<T>,
}

impl<T: Real> ElementEval<T> {
    pub fn new(
        mesh: &TetMesh<T>,
        x: &[Vector3<T>],
        tet: usize,
        material: &MaterialModel,
    ) -> Result<Self, ElasticityError> {
        let f = mesh.deformation_gradient(x, tet);
        Self::from_f(f, mesh.rest_volume[tet], material).map_err(|e| match e {
            ElasticityError::Inverted { det, .. } => ElasticityError::Inverted { tet, det },
            other => other,
        })
    }

    pub fn from_f(f: Matrix3<T>, volume: T, material: &MaterialModel) -> Result<Self, ElasticityError> {
        let i2 = f.norm_squared();
        let i3 = f.determinant();
        let (i1, rotation, twist) = if material.model.uses_i1() {
            let inv = svd_polar(&f);
            (inv.i1, Some(inv.r), Some(twist_modes(&inv.u, &inv.v, &inv.sigma)))
        } else {
            (T::zero(), None, None)
        };
        let inverted = || ElasticityError::Inverted {
            tet: usize::MAX,
            det: i3.to_f64(),
        };
        let psi = psi_from_invariants(material, i1, i2, i3).ok_or_else(inverted)?;
        let der = psi_derivatives_from_invariants(material, i3).ok_or_else(inverted)?;
        Ok(ElementEval {
            energy: volume * psi,
            volume,
            f,
            d: der.d,
            dd: der.dd,
            rotation,
            twist,
            cof: cofactor(&f),
        })
    }

    /// `∂Ψ/∂F = Σ ∂Ψ/∂Iᵢ · Gᵢ` (first Piola-Kirchhoff stress).
    pub fn stress(&self) -> Matrix3<T> {
        let mut p = self.f * (T::of(2.0) * self.d[1]) + self.cof * self.d[2];
        if let Some(r) = &self.rotation {
            p += r * self.d[0];
        }
        p
    }

    /// Gradient of `V·Ψ`; column `a` belongs to vertex `a` of the tet.
    pub fn gradient(&self, dmat: &Matrix4x3<T>) -> Matrix3x4<T> {
        self.stress() * dmat.transpose() * self.volume
    }

    /// Diagonal of `V·∂²Ψ/∂x²` laid out like [`Self::gradient`].
    pub fn diag_hessian(&self, dmat: &Matrix4x3<T>) -> Matrix3x4<T> {
        let z = T::zero();
        let dt = dmat.transpose();
        let mut out = Matrix3x4::zeros();

        // Σ ∂²Ψ/∂Iᵢ² · diag(h_i) with diag(h_i) = (Gᵢ Dᵀ)∘².
        if self.dd[0] != z {
            if let Some(r) = &self.rotation {
                out += (r * dt).map(|v| v * v) * self.dd[0];
            }
        }
        if self.dd[1] != z {
            out += (self.f * dt).map(|v| v * v) * (T::of(4.0) * self.dd[1]);
        }
        if self.dd[2] != z {
            out += (self.cof * dt).map(|v| v * v) * self.dd[2];
        }

        // ∂Ψ/∂I1 · diag(h_4) = Σₖ λₖ (Qₖ Dᵀ)∘².
        if self.d[0] != z {
            if let Some(tw) = &self.twist {
                for k in 0..3 {
                    out += (tw.q[k] * dt).map(|v| v * v) * (self.d[0] * tw.lambda[k]);
                }
            }
        }
        // ∂Ψ/∂I2 · diag(h_5) = 2 Σⱼ D[a,j]², the same for all three components.
        if self.d[1] != z {
            for a in 0..4 {
                let s = dmat.row(a).norm_squared() * T::of(2.0) * self.d[1];
                for c in 0..3 {
                    out[(c, a)] += s;
                }
            }
        }
        // diag(h_6) vanishes: a single-component perturbation gives rank-one
        // column updates, on which det has no quadratic term.
        out * self.volume
    }

    /// `pᵀ (V·∂²Ψ/∂x²) p` with `p` given per tet vertex (column `a`).
    pub fn quadratic_form(&self, dmat: &Matrix4x3<T>, p: &Matrix3x4<T>) -> T {
        let z = T::zero();
        let w = p * dmat;
        let mut q = z;
        if self.dd[0] != z {
            if let Some(r) = &self.rotation {
                let s = r.dot(&w);
                q += self.dd[0] * s * s;
            }
        }
        if self.dd[1] != z {
            let s = T::of(2.0) * self.f.dot(&w);
            q += self.dd[1] * s * s;
        }
        if self.dd[2] != z {
            let s = self.cof.dot(&w);
            q += self.dd[2] * s * s;
        }
        if self.d[0] != z {
            if let Some(tw) = &self.twist {
                let mut s = z;
                for k in 0..3 {
                    let c = tw.q[k].dot(&w);
                    s += tw.lambda[k] * c * c;
                }
                q += self.d[0] * s;
            }
        }
        if self.d[1] != z {
            q += self.d[1] * T::of(2.0) * w.norm_squared();
        }
        if self.d[2] != z {
            q += self.d[2] * det_hessian_quadratic(&self.f, &w);
        }
        q * self.volume
    }
}

fn to_columns<T: Real>(v: &SVector<T, 12>) -> Matrix3x4<T> {
    Matrix3x4::from_column_slice(v.as_slice())
}

fn to_stacked<T: Real>(m: &Matrix3x4<T>) -> SVector<T, 12> {
    SVector::<T, 12>::from_column_slice(m.as_slice())
}

/// `V · Ψ(F(x))` for one tet.
pub fn element_energy<T: Real>(
    mesh: &TetMesh<T>,
    x: &[Vector3<T>],
    tet: usize,
    material: &MaterialModel,
) -> Result<T, ElasticityError> {
    Ok(ElementEval::new(mesh, x, tet, material)?.energy)
}

/// Gradient of `V·Ψ` with respect to the tet's 12 stacked coordinates.
pub fn element_gradient<T: Real>(
    mesh: &TetMesh<T>,
    x: &[Vector3<T>],
    tet: usize,
    material: &MaterialModel,
) -> Result<SVector<T, 12>, ElasticityError> {
    let e = ElementEval::new(mesh, x, tet, material)?;
    Ok(to_stacked(&e.gradient(&mesh.dfdx[tet])))
}

/// Diagonal of the element Hessian, from the six-term split.
pub fn element_diag_hessian<T: Real>(
    mesh: &TetMesh<T>,
    x: &[Vector3<T>],
    tet: usize,
    material: &MaterialModel,
) -> Result<SVector<T, 12>, ElasticityError> {
    let e = ElementEval::new(mesh, x, tet, material)?;
    Ok(to_stacked(&e.diag_hessian(&mesh.dfdx[tet])))
}

/// `pᵀ H p` for the element Hessian, from the six-term split.
pub fn element_quadratic_form<T: Real>(
    mesh: &TetMesh<T>,
    x: &[Vector3<T>],
    tet: usize,
    material: &MaterialModel,
    p: &SVector<T, 12>,
) -> Result<T, ElasticityError> {
    let e = ElementEval::new(mesh, x, tet, material)?;
    Ok(e.quadratic_form(&mesh.dfdx[tet], &to_columns(p)))
}
