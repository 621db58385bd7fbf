//! Scene description files (TOML).

use crate::contact::HalfSpace;
use crate::elasticity::{ElasticityError, EnergyModel, MaterialModel};
use crate::mesh::{box_grid, load_mesh, MeshError, MeshFormat, ObjectGeometry, TetMesh};
use crate::solver::{default_curvature_floor, default_preconditioner_floor, BetaVariant, SolverConfig, Splitting};
use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Required value of the top-level `schema` key.
pub const SCENE_SCHEMA: &str = "pncg-scene/1";

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read scene {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("unsupported scene schema `{0}` (expected `{SCENE_SCHEMA}`)")]
    Schema(String),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Material(#[from] ElasticityError),
    #[error("initial configuration is not penetration-free: {0}")]
    InitialPenetration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f32" | "single" | "float" => Ok(Precision::F32),
            "f64" | "double" => Ok(Precision::F64),
            other => Err(format!("unknown precision `{other}` (expected f32 or f64)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub h: f64,
    /// Absolute activation distance; overrides `d_hat_fraction`.
    #[serde(default)]
    pub d_hat: Option<f64>,
    /// Activation distance as a fraction of the average surface edge length.
    #[serde(default)]
    pub d_hat_fraction: Option<f64>,
    pub kappa: f64,
    pub epsilon: f64,
    pub iter_max: usize,
    #[serde(default)]
    pub beta_variant: BetaVariant,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default = "default_curvature_floor")]
    pub curvature_floor: f64,
    #[serde(default = "default_preconditioner_floor")]
    pub preconditioner_floor: f64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default = "yes")]
    pub self_contact: bool,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative to the current directory.
    #[serde(default = "default_out_dir")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub obj: bool,
    /// Write every n-th frame's OBJ.
    #[serde(default = "one")]
    pub every: usize,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_out_dir(),
            obj: true,
            every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub cells: [usize; 3],
    pub size: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub model: EnergyModel,
    #[serde(default)]
    pub youngs_modulus: Option<f64>,
    #[serde(default)]
    pub poisson_ratio: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl MaterialSpec {
    pub fn build(&self) -> Result<MaterialModel, SceneError> {
        match (self.youngs_modulus, self.poisson_ratio, self.mu, self.lambda) {
            (Some(e), Some(nu), None, None) => Ok(MaterialModel::from_young_poisson(self.model, e, nu)?),
            (None, None, Some(mu), Some(lambda)) => Ok(MaterialModel::new(self.model, mu, lambda)?),
            _ => Err(SceneError::Invalid(
                "material needs either youngs_modulus + poisson_ratio or mu + lambda".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Mesh file, relative to the scene file.
    #[serde(default)]
    pub mesh: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
    /// Generated axis-aligned box with its minimum corner at the origin.
    #[serde(default, rename = "box")]
    pub box_grid: Option<BoxSpec>,
    pub material: MaterialSpec,
    /// kg/m³.
    pub density: f64,
    #[serde(default)]
    pub scale: Option<[f64; 3]>,
    /// Rotation about x, then y, then z (degrees).
    #[serde(default)]
    pub rotation_deg: [f64; 3],
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 3],
}

/// Half-space obstacle, optionally translating during `[start, stop]` and
/// removed from `release` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub point: [f64; 3],
    pub normal: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 3],
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub release: Option<f64>,
}

impl PlaneSpec {
    /// The half-space at time `t`, or `None` once released.
    pub fn at(&self, t: f64) -> Option<HalfSpace> {
        if self.release.is_some_and(|r| t >= r) {
            return None;
        }
        let tau = active_time(t, self.start, self.stop);
        let p = Vector3::from(self.point) + Vector3::from(self.velocity) * tau;
        Some(HalfSpace::new(p, Vector3::from(self.normal)))
    }
}

/// Time spent moving by `t` for motion active on `[start, stop]`.
pub fn active_time(t: f64, start: f64, stop: Option<f64>) -> f64 {
    let end = stop.unwrap_or(f64::INFINITY);
    (t.min(end) - start).max(0.0)
}

/// Axis-aligned selection box in world coordinates; missing bounds are unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Selection {
    #[serde(default)]
    pub min: Option<[f64; 3]>,
    #[serde(default)]
    pub max: Option<[f64; 3]>,
}

impl Selection {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let lo = self.min.map_or(Vector3::repeat(f64::NEG_INFINITY), Vector3::from);
        let hi = self.max.map_or(Vector3::repeat(f64::INFINITY), Vector3::from);
        (0..3).all(|k| p[k] >= lo[k] && p[k] <= hi[k])
    }
}

/// Rigid motion imposed on selected vertices of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSpec {
    /// Object index.
    pub object: usize,
    #[serde(default)]
    pub select: Selection,
    #[serde(default)]
    pub angular_velocity_deg: f64,
    #[serde(default = "z_axis")]
    pub axis: [f64; 3],
    /// Rotation center; defaults to the centroid of the selection.
    #[serde(default)]
    pub center: Option<[f64; 3]>,
    #[serde(default)]
    pub velocity: [f64; 3],
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub stop: Option<f64>,
    /// From this time on the vertices are free.
    #[serde(default)]
    pub release: Option<f64>,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub gravity: [f64; 3],
    pub frames: usize,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub ground: Vec<PlaneSpec>,
    #[serde(default)]
    pub scripts: Vec<ScriptSpec>,
    /// Directory relative mesh paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scene {
    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let src = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&src, &base)
    }

    pub fn from_toml_str(src: &str, base_dir: &Path) -> Result<Self, SceneError> {
        let mut scene: Scene = toml::from_str(src).map_err(|e| SceneError::Parse(e.to_string()))?;
        scene.base_dir = base_dir.to_path_buf();
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.schema != SCENE_SCHEMA {
            return Err(SceneError::Schema(self.schema.clone()));
        }
        if self.objects.is_empty() {
            return Err(SceneError::Invalid("scene has no objects".into()));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.mesh.is_some() == o.box_grid.is_some() {
                return Err(SceneError::Invalid(format!("object {i}: give exactly one of `mesh` or `box`")));
            }
            if let Some(path) = &o.mesh {
                let full = self.base_dir.join(path);
                let exists = full.exists() || full.with_extension("node").exists();
                if !exists {
                    return Err(SceneError::Invalid(format!("object {i}: mesh file {} not found", full.display())));
                }
            }
            o.material.build()?;
        }
        for (i, p) in self.ground.iter().enumerate() {
            if !(Vector3::from(p.normal).norm() > 0.0) {
                return Err(SceneError::Invalid(format!("ground {i}: zero normal")));
            }
        }
        for (i, s) in self.scripts.iter().enumerate() {
            if s.object >= self.objects.len() {
                return Err(SceneError::Invalid(format!("script {i}: object {} does not exist", s.object)));
            }
            if s.angular_velocity_deg != 0.0 && !(Vector3::from(s.axis).norm() > 0.0) {
                return Err(SceneError::Invalid(format!("script {i}: zero rotation axis")));
            }
        }
        let s = &self.solver;
        if let Some(f) = s.d_hat_fraction {
            if !(f > 0.0) {
                return Err(SceneError::Invalid("d_hat_fraction must be positive".into()));
            }
        }
        if self.output.every == 0 {
            return Err(SceneError::Invalid("output.every must be at least 1".into()));
        }
        self.solver_config(1.0).validate().map_err(SceneError::Invalid)
    }

    /// Geometry of every object with its transform applied.
    pub fn object_geometry(&self) -> Result<Vec<ObjectGeometry>, SceneError> {
        self.objects
            .iter()
            .map(|o| {
                let data = match (&o.mesh, &o.box_grid) {
                    (Some(path), _) => {
                        let format = o
                            .format
                            .as_deref()
                            .map(MeshFormat::from_str)
                            .transpose()
                            .map_err(SceneError::Invalid)?;
                        load_mesh(&self.base_dir.join(path), format)?
                    }
                    (None, Some(b)) => box_grid(b.cells, Vector3::from(b.size)),
                    (None, None) => unreachable!("validated"),
                };
                let r = o.rotation_deg.map(f64::to_radians);
                let rotation = Rotation3::from_euler_angles(r[0], r[1], r[2]);
                let scale = Vector3::from(o.scale.unwrap_or([1.0; 3]));
                Ok(ObjectGeometry {
                    data: data.transformed(scale, rotation.matrix(), Vector3::from(o.translation)),
                    density: o.density,
                })
            })
            .collect()
    }

    pub fn build_mesh(&self) -> Result<TetMesh<f64>, SceneError> {
        Ok(TetMesh::from_objects(self.object_geometry()?)?)
    }

    pub fn materials(&self) -> Result<Vec<MaterialModel>, SceneError> {
        self.objects.iter().map(|o| o.material.build()).collect()
    }

    /// Activation distance for a mesh with the given average surface edge length.
    pub fn d_hat(&self, average_edge: f64) -> f64 {
        self.solver
            .d_hat
            .unwrap_or_else(|| self.solver.d_hat_fraction.unwrap_or(0.5) * average_edge)
    }

    pub fn solver_config(&self, average_edge: f64) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            h: s.h,
            d_hat: self.d_hat(average_edge),
            kappa: s.kappa,
            epsilon: s.epsilon,
            iter_max: s.iter_max,
            beta_variant: s.beta_variant,
            splitting: s.splitting,
            curvature_floor: s.curvature_floor,
            preconditioner_floor: s.preconditioner_floor,
            deterministic: s.deterministic,
        }
    }

    /// Active half-spaces at time `t`.
    pub fn planes_at(&self, t: f64) -> Vec<HalfSpace> {
        self.ground.iter().filter_map(|p| p.at(t)).collect()
    }
}
