//! Time integration, boundary conditions and kinematic scripts.
//!
//! Each step minimizes the implicit-Euler incremental potential with
//! `x̃ = x + hv + h²g`. Scripted vertices are moved to their prescribed
//! position before the solve and masked out of it; velocities are updated
//! as `(x' − x)/h`.

mod scene;

pub use crate::contact::ground_contact_constraints;
pub use scene::{
    active_time, BoxSpec, MaterialSpec, ObjectSpec, OutputSection, PlaneSpec, Precision, Scene,
    SceneError, ScriptSpec, Selection, SolverSection, SCENE_SCHEMA,
};

use crate::contact::{
    audit_positions, build_exclusion_table, default_cell_size, AuditReport, ExclusionTable, HalfSpace, Surface,
};
use crate::elasticity::MaterialModel;
use crate::mesh::TetMesh;
use crate::real::Real;
use crate::solver::{constraint_set, pncg_solve, ContactContext, ConvergenceRecord, Problem, SolverConfig, SolverError};
use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Free,
    /// Held at its current position.
    Fixed,
    /// Follows a script.
    Scripted,
}

#[derive(Debug, Clone)]
pub struct SimState<T: Real> {
    pub x: Vec<Vector3<T>>,
    pub v: Vec<Vector3<T>>,
    /// Inertia target of the most recent step.
    pub x_tilde: Vec<Vector3<T>>,
    pub t: f64,
    pub bc: Vec<BoundaryCondition>,
    /// Number of completed steps.
    pub frame: usize,
}

impl<T: Real> SimState<T> {
    /// At rest in the mesh's rest configuration.
    pub fn at_rest(mesh: &TetMesh<T>) -> Self {
        let n = mesh.num_vertices();
        SimState {
            x: mesh.vertices_rest.clone(),
            v: vec![Vector3::zeros(); n],
            x_tilde: mesh.vertices_rest.clone(),
            t: 0.0,
            bc: vec![BoundaryCondition::Free; n],
            frame: 0,
        }
    }
}

/// A rigid motion `c + R(ωτ)(x₀ − c) + uτ` applied to a fixed vertex set,
/// where `τ` is the time spent inside `[start, stop]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub vertices: Vec<usize>,
    /// Positions at `t = 0`.
    pub origin: Vec<Vector3<f64>>,
    pub center: Vector3<f64>,
    pub axis: Unit<Vector3<f64>>,
    /// rad/s.
    pub angular_velocity: f64,
    pub velocity: Vector3<f64>,
    pub start: f64,
    pub stop: Option<f64>,
    pub release: Option<f64>,
}

impl Script {
    pub fn from_spec<T: Real>(spec: &ScriptSpec, mesh: &TetMesh<T>, x0: &[Vector3<T>]) -> Result<Self, SceneError> {
        let range = mesh.object_vertices[spec.object].clone();
        let vertices: Vec<usize> = range
            .filter(|&v| spec.select.contains(&x0[v].map(|c| c.to_f64())))
            .collect();
        if vertices.is_empty() {
            return Err(SceneError::Invalid(format!(
                "script on object {} selects no vertices",
                spec.object
            )));
        }
        let origin: Vec<Vector3<f64>> = vertices.iter().map(|&v| x0[v].map(|c| c.to_f64())).collect();
        let center = spec
            .center
            .map(Vector3::from)
            .unwrap_or_else(|| origin.iter().sum::<Vector3<f64>>() / origin.len() as f64);
        let axis = Unit::try_new(Vector3::from(spec.axis), 1e-300).unwrap_or(Vector3::z_axis());
        Ok(Script {
            vertices,
            origin,
            center,
            axis,
            angular_velocity: spec.angular_velocity_deg.to_radians(),
            velocity: Vector3::from(spec.velocity),
            start: spec.start,
            stop: spec.stop,
            release: spec.release,
        })
    }

    /// Whether the script still controls its vertices at time `t`.
    pub fn active(&self, t: f64) -> bool {
        !self.release.is_some_and(|r| t >= r)
    }

    /// Whether the motion is the identity at all times.
    pub fn is_static(&self) -> bool {
        self.angular_velocity == 0.0 && self.velocity == Vector3::zeros()
    }

    /// The rigid transform at time `t` applied to `p`.
    pub fn place(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64> {
        let tau = active_time(t, self.start, self.stop);
        let r = Rotation3::from_axis_angle(&self.axis, self.angular_velocity * tau);
        self.center + r * (p - self.center) + self.velocity * tau
    }
}

/// Moves every active script's vertices to their placement at time `t`,
/// sets their velocity to the finite difference over the last `h` and
/// their boundary condition; released vertices become free.
pub fn apply_scripts<T: Real>(scripts: &[Script], state: &mut SimState<T>, t: f64, h: f64) {
    for s in scripts {
        let active = s.active(t);
        for (k, &v) in s.vertices.iter().enumerate() {
            if !active {
                state.bc[v] = BoundaryCondition::Free;
                continue;
            }
            let target = s.place(&s.origin[k], t).map(T::of);
            state.v[v] = (target - state.x[v]) / T::of(h);
            state.x[v] = target;
            state.bc[v] = if s.is_static() {
                BoundaryCondition::Fixed
            } else {
                BoundaryCondition::Scripted
            };
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("frame {frame}: {source}")]
pub struct SimError {
    pub frame: usize,
    #[source]
    pub source: SolverError,
}

/// A scene instantiated at precision `T`.
#[derive(Debug, Clone)]
pub struct Simulation<T: Real> {
    pub scene: Scene,
    pub mesh: TetMesh<T>,
    pub materials: Vec<MaterialModel>,
    pub config: SolverConfig,
    pub exclusion: ExclusionTable,
    pub cell_size: f64,
    pub scripts: Vec<Script>,
    pub gravity: Vector3<T>,
    pub state: SimState<T>,
}

impl<T: Real> Simulation<T> {
    pub fn new(scene: Scene) -> Result<Self, SceneError> {
        let mesh64 = scene.build_mesh()?;
        let avg = mesh64.average_surface_edge_length();
        let config = scene.solver_config(avg);
        config.validate().map_err(SceneError::Invalid)?;
        let cell_size = default_cell_size(config.d_hat, avg);
        let exclusion = if scene.solver.self_contact {
            build_exclusion_table(&mesh64, config.d_hat, cell_size)
        } else {
            ExclusionTable::default()
        };
        Self::with_parts(scene, mesh64.cast(), config, exclusion, cell_size)
    }

    /// Builds a simulation from an already prepared mesh and solver settings.
    pub fn with_parts(
        scene: Scene,
        mesh: TetMesh<T>,
        config: SolverConfig,
        exclusion: ExclusionTable,
        cell_size: f64,
    ) -> Result<Self, SceneError> {
        let materials = scene.materials()?;
        let mut state = SimState::at_rest(&mesh);
        for (o, spec) in scene.objects.iter().enumerate() {
            let v0 = Vector3::from(spec.velocity).map(T::of);
            for i in mesh.object_vertices[o].clone() {
                state.v[i] = v0;
            }
        }
        let scripts = scene
            .scripts
            .iter()
            .map(|s| Script::from_spec(s, &mesh, &state.x))
            .collect::<Result<Vec<_>, _>>()?;
        for s in &scripts {
            if s.active(0.0) {
                for &v in &s.vertices {
                    state.bc[v] = if s.is_static() {
                        BoundaryCondition::Fixed
                    } else {
                        BoundaryCondition::Scripted
                    };
                }
            }
        }
        let sim = Simulation {
            gravity: Vector3::from(scene.gravity).map(T::of),
            scene,
            mesh,
            materials,
            config,
            exclusion,
            cell_size,
            scripts,
            state,
        };
        let planes = sim.scene.planes_at(0.0);
        constraint_set(&sim.problem(&sim.state.x, &[], &planes), &sim.state.x, &sim.config)
            .map_err(|e| SceneError::InitialPenetration(e.to_string()))?;
        Ok(sim)
    }

    fn problem<'a>(&'a self, x_tilde: &'a [Vector3<T>], fixed: &'a [bool], planes: &'a [HalfSpace]) -> Problem<'a, T> {
        Problem {
            mesh: &self.mesh,
            materials: &self.materials,
            x_tilde,
            fixed,
            contact: Some(ContactContext {
                exclusion: &self.exclusion,
                cell_size: self.cell_size,
                planes,
                self_contact: self.scene.solver.self_contact,
            }),
        }
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<ConvergenceRecord, SimError> {
        let h = self.config.h;
        let t1 = self.state.t + h;
        let x0 = self.state.x.clone();
        let g = self.gravity * T::of(h * h);
        let ht = T::of(h);

        apply_scripts(&self.scripts, &mut self.state, t1, h);
        let fixed: Vec<bool> = self.state.bc.iter().map(|&b| b != BoundaryCondition::Free).collect();
        let x_tilde: Vec<Vector3<T>> = (0..x0.len())
            .map(|i| {
                if fixed[i] {
                    self.state.x[i]
                } else {
                    x0[i] + self.state.v[i] * ht + g
                }
            })
            .collect();
        let planes = self.scene.planes_at(t1);

        let mut x = self.state.x.clone();
        let record = pncg_solve(&self.problem(&x_tilde, &fixed, &planes), &self.config, &mut x).map_err(|source| {
            SimError {
                frame: self.state.frame,
                source,
            }
        })?;

        let inv_h = T::one() / ht;
        self.state.v = x.iter().zip(&x0).map(|(a, b)| (a - b) * inv_h).collect();
        self.state.x = x;
        self.state.x_tilde = x_tilde;
        self.state.t = t1;
        self.state.frame += 1;
        Ok(record)
    }

    /// Active half-spaces at the current time.
    pub fn planes(&self) -> Vec<HalfSpace> {
        self.scene.planes_at(self.state.t)
    }

    /// Discrete penetration audit of the current positions.
    pub fn audit(&self, exact: bool) -> AuditReport {
        let radius = if exact { None } else { Some(self.config.d_hat) };
        audit_positions(Surface::of(&self.mesh), &self.state.x, &self.planes(), radius)
    }
}
