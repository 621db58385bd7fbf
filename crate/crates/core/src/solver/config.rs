use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Conjugate-gradient `β` formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BetaVariant {
    /// Dai–Kou.
    #[default]
    Dk,
    /// Fletcher–Reeves.
    Fr,
    /// Polak–Ribière–Polyak, clamped at zero.
    Prp,
}

impl BetaVariant {
    pub const ALL: [BetaVariant; 3] = [BetaVariant::Dk, BetaVariant::Fr, BetaVariant::Prp];

    pub fn name(self) -> &'static str {
        match self {
            BetaVariant::Dk => "dk",
            BetaVariant::Fr => "fr",
            BetaVariant::Prp => "prp",
        }
    }
}

impl fmt::Display for BetaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BetaVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dk" => Ok(BetaVariant::Dk),
            "fr" => Ok(BetaVariant::Fr),
            "prp" => Ok(BetaVariant::Prp),
            other => Err(format!("unknown beta variant `{other}` (expected dk, fr or prp)")),
        }
    }
}

/// How step sizes and directions are separated across the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    #[default]
    Off,
    /// One region per object.
    PerObject,
    /// Vertices near active contacts versus the rest, fixed for the time step.
    CollisionPartition,
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Splitting::Off => "off",
            Splitting::PerObject => "per_object",
            Splitting::CollisionPartition => "collision_partition",
        })
    }
}

impl FromStr for Splitting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "off" | "none" => Ok(Splitting::Off),
            "per_object" | "object" => Ok(Splitting::PerObject),
            "collision_partition" | "collision" => Ok(Splitting::CollisionPartition),
            other => Err(format!(
                "unknown splitting `{other}` (expected off, per-object or collision-partition)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Time step (s).
    pub h: f64,
    /// Barrier activation distance (m).
    pub d_hat: f64,
    /// Barrier stiffness.
    pub kappa: f64,
    /// Relative energy-decrease tolerance.
    pub epsilon: f64,
    pub iter_max: usize,
    #[serde(default)]
    pub beta_variant: BetaVariant,
    #[serde(default)]
    pub splitting: Splitting,
    /// Smallest accepted `pᵀHp`, relative to `pᵀMp`.
    #[serde(default = "default_curvature_floor")]
    pub curvature_floor: f64,
    /// Lower bound on the preconditioned Hessian diagonal, relative to the
    /// lumped mass. The barrier and elastic diagonals can be negative.
    #[serde(default = "default_preconditioner_floor")]
    pub preconditioner_floor: f64,
    /// Fixed-order reductions, so repeated runs are bit-identical.
    #[serde(default)]
    pub deterministic: bool,
}

pub fn default_curvature_floor() -> f64 {
    1e-6
}

pub fn default_preconditioner_floor() -> f64 {
    1.0
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 0.01,
            d_hat: 1e-3,
            kappa: 1.0,
            epsilon: 1e-3,
            iter_max: 100,
            beta_variant: BetaVariant::Dk,
            splitting: Splitting::Off,
            curvature_floor: default_curvature_floor(),
            preconditioner_floor: default_preconditioner_floor(),
            deterministic: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        pos("h", self.h)?;
        pos("d_hat", self.d_hat)?;
        pos("kappa", self.kappa)?;
        pos("curvature_floor", self.curvature_floor)?;
        pos("preconditioner_floor", self.preconditioner_floor)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.iter_max == 0 {
            return Err("iter_max must be at least 1".into());
        }
        Ok(())
    }
}
