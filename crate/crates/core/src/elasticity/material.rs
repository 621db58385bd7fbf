use crate::real::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyModel {
    #[serde(alias = "nh")]
    NeoHookean,
    #[serde(alias = "snh")]
    StableNeoHookean,
    Arap,
    #[serde(alias = "fcr")]
    FixedCorotated,
}

impl EnergyModel {
    pub const ALL: [EnergyModel; 4] = [
        EnergyModel::NeoHookean,
        EnergyModel::StableNeoHookean,
        EnergyModel::Arap,
        EnergyModel::FixedCorotated,
    ];

    /// Whether Ψ depends on `I1 = tr(S)`, i.e. whether a polar decomposition is needed.
    pub fn uses_i1(self) -> bool {
        matches!(self, EnergyModel::Arap | EnergyModel::FixedCorotated)
    }

    /// Whether the energy is undefined for `det F ≤ 0`.
    pub fn requires_positive_det(self) -> bool {
        matches!(self, EnergyModel::NeoHookean)
    }
}

impl std::str::FromStr for EnergyModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nh" | "neohookean" | "neo-hookean" => Ok(EnergyModel::NeoHookean),
            "snh" | "stableneohookean" | "stable-neo-hookean" => Ok(EnergyModel::StableNeoHookean),
            "arap" => Ok(EnergyModel::Arap),
            "fcr" | "fixedcorotated" | "fixed-corotated" => Ok(EnergyModel::FixedCorotated),
            other => Err(format!("unknown energy model `{other}`")),
        }
    }
}

/// Energy model together with its Lamé parameters (Pa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub model: EnergyModel,
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ElasticityError {
    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),
    #[error("element {tet} inverted (det F = {det:e}) under an energy that forbids inversion")]
    Inverted { tet: usize, det: f64 },
}

impl MaterialModel {
    pub fn new(model: EnergyModel, mu: f64, lambda: f64) -> Result<Self, ElasticityError> {
        let m = MaterialModel { model, mu, lambda };
        m.validate()?;
        Ok(m)
    }

    /// Lamé parameters from Young's modulus and Poisson's ratio.
    pub fn from_young_poisson(model: EnergyModel, young: f64, poisson: f64) -> Result<Self, ElasticityError> {
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(ElasticityError::InvalidMaterial(format!(
                "Poisson ratio {poisson} outside (-1, 0.5)"
            )));
        }
        let mu = young / (2.0 * (1.0 + poisson));
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        Self::new(model, mu, lambda)
    }

    pub fn validate(&self) -> Result<(), ElasticityError> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(ElasticityError::InvalidMaterial(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(ElasticityError::InvalidMaterial(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if self.model == EnergyModel::StableNeoHookean && self.lambda == 0.0 {
            return Err(ElasticityError::InvalidMaterial(
                "stable Neo-Hookean needs lambda > 0 (its rest offset is mu/lambda)".into(),
            ));
        }
        Ok(())
    }
}

/// First and second derivatives of Ψ with respect to each invariant.
/// Mixed derivatives vanish for every supported model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiDerivatives<T> {
    pub d: [T; 3],
    pub dd: [T; 3],
}

/// Energy density Ψ(I1, I2, I3).
pub fn psi_from_invariants<T: Real>(m: &MaterialModel, i1: T, i2: T, i3: T) -> Option<T> {
    let mu = T::of(m.mu);
    let lambda = T::of(m.lambda);
    let half = T::of(0.5);
    let one = T::one();
    let three = T::of(3.0);
    Some(match m.model {
        EnergyModel::NeoHookean => {
            if i3 <= T::zero() {
                return None;
            }
            let l = i3.ln();
            half * mu * (i2 - three) - mu * l + half * lambda * l * l
        }
        EnergyModel::StableNeoHookean => {
            let a = i3 - one - mu / lambda;
            half * mu * (i2 - three) + half * lambda * a * a
        }
        EnergyModel::Arap => half * mu * (i2 - T::of(2.0) * i1 + three),
        EnergyModel::FixedCorotated => {
            let a = i3 - one;
            mu * (i2 - T::of(2.0) * i1 + three) + half * lambda * a * a
        }
    })
}

pub fn psi_derivatives_from_invariants<T: Real>(m: &MaterialModel, i3: T) -> Option<PsiDerivatives<T>> {
    let mu = T::of(m.mu);
    let lambda = T::of(m.lambda);
    let half = T::of(0.5);
    let one = T::one();
    let z = T::zero();
    Some(match m.model {
        EnergyModel::NeoHookean => {
            if i3 <= z {
                return None;
            }
            let l = i3.ln();
            PsiDerivatives {
                d: [z, half * mu, (lambda * l - mu) / i3],
                dd: [z, z, (mu - lambda * l + lambda) / (i3 * i3)],
            }
        }
        EnergyModel::StableNeoHookean => PsiDerivatives {
            d: [z, half * mu, lambda * (i3 - one - mu / lambda)],
            dd: [z, z, lambda],
        },
        EnergyModel::Arap => PsiDerivatives {
            d: [-mu, half * mu, z],
            dd: [z, z, z],
        },
        EnergyModel::FixedCorotated => PsiDerivatives {
            d: [-T::of(2.0) * mu, mu, lambda * (i3 - one)],
            dd: [z, z, lambda],
        },
    })
}
