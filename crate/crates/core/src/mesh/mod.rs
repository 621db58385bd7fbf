//! Tetrahedral meshes and their rest-state precomputation.
//!
//! A [`TetMesh`] is built once per scene from one or more objects, then stays
//! immutable for the whole run. Besides the raw geometry it stores everything
//! the per-element kernels need: inverse rest shape matrices, rest volumes, the
//! compact form of `∂vec(F)/∂x`, lumped masses, and the extracted surface.

mod generate;
mod io;

pub use generate::{box_grid, unit_cube_five_tets, unit_tet};
pub use io::{load_mesh, parse_structured, parse_tetgen, MeshFormat};

use crate::real::Real;
use nalgebra::{Matrix3, Matrix4x3, SMatrix, Vector3};
use rustc_hash::FxHashMap;
use std::ops::Range;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("I/O error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("tet {index} has non-positive rest volume {volume:e}")]
    InvertedTet { index: usize, volume: f64 },
    #[error("tet {index} references vertex {vertex} but the mesh has {count} vertices")]
    BadIndex {
        index: usize,
        vertex: usize,
        count: usize,
    },
    #[error("density must be positive, got {0}")]
    BadDensity(f64),
    #[error("unknown mesh format for {0}")]
    UnknownFormat(String),
    #[error("mesh has no tetrahedra")]
    Empty,
    #[error("vertex {0} belongs to no tetrahedron")]
    UnreferencedVertex(usize),
}

/// Raw tetrahedral geometry as read from disk or produced by a generator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshData {
    pub vertices: Vec<Vector3<f64>>,
    pub tets: Vec<[usize; 4]>,
}

impl MeshData {
    /// Applies `x ↦ rotation · (scale ⊙ x) + translation` to every vertex.
    pub fn transformed(
        mut self,
        scale: Vector3<f64>,
        rotation: &Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Self {
        for v in &mut self.vertices {
            *v = rotation * v.component_mul(&scale) + translation;
        }
        self
    }
}

/// One object of a scene: its geometry and mass density (kg/m³).
#[derive(Debug, Clone)]
pub struct ObjectGeometry {
    pub data: MeshData,
    pub density: f64,
}

/// Immutable tetrahedral mesh with precomputed rest quantities.
///
/// `dfdx` holds the 4×3 shape-gradient matrix `D` of each tet. The full
/// 9×12 map `∂vec(F)/∂x` is block sparse: entry `(3j + i, 3a + i)` equals
/// `D[(a, j)]`, everything else is zero. [`TetMesh::dfdx_dense`] expands it.
#[derive(Debug, Clone)]
pub struct TetMesh<T: Real = f64> {
    pub vertices_rest: Vec<Vector3<T>>,
    pub tets: Vec<[usize; 4]>,
    pub surface_faces: Vec<[usize; 3]>,
    pub surface_edges: Vec<[usize; 2]>,
    pub surface_vertices: Vec<usize>,
    pub dm_inv: Vec<Matrix3<T>>,
    pub rest_volume: Vec<T>,
    pub dfdx: Vec<Matrix4x3<T>>,
    pub mass: Vec<T>,
    /// Object id of every vertex.
    pub vertex_object: Vec<usize>,
    /// Object id of every tet.
    pub tet_object: Vec<usize>,
    /// Contiguous vertex range of every object.
    pub object_vertices: Vec<Range<usize>>,
    /// Number of surface edges not shared by exactly two surface faces.
    pub non_manifold_edges: usize,
}

impl TetMesh<f64> {
    /// Single-object mesh with uniform density.
    pub fn new(data: MeshData, density: f64) -> Result<Self, MeshError> {
        Self::from_objects(vec![ObjectGeometry { data, density }])
    }

    /// Concatenates several objects into one mesh. Vertex and tet indices of
    /// object `k` are offset by the sizes of objects `0..k`.
    pub fn from_objects(objects: Vec<ObjectGeometry>) -> Result<Self, MeshError> {
        let mut vertices = Vec::new();
        let mut tets = Vec::new();
        let mut tet_density = Vec::new();
        let mut vertex_object = Vec::new();
        let mut tet_object = Vec::new();
        let mut object_vertices = Vec::new();

        for (oid, obj) in objects.into_iter().enumerate() {
            if !(obj.density > 0.0 && obj.density.is_finite()) {
                return Err(MeshError::BadDensity(obj.density));
            }
            let base = vertices.len();
            let n = obj.data.vertices.len();
            for (ti, t) in obj.data.tets.iter().enumerate() {
                for &v in t {
                    if v >= n {
                        return Err(MeshError::BadIndex {
                            index: tets.len() + ti,
                            vertex: v,
                            count: n,
                        });
                    }
                }
            }
            vertices.extend(obj.data.vertices);
            tets.extend(obj.data.tets.iter().map(|t| t.map(|v| v + base)));
            tet_density.extend(std::iter::repeat(obj.density).take(obj.data.tets.len()));
            vertex_object.extend(std::iter::repeat(oid).take(n));
            tet_object.extend(std::iter::repeat(oid).take(obj.data.tets.len()));
            object_vertices.push(base..base + n);
        }
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }

        let mut dm_inv = Vec::with_capacity(tets.len());
        let mut rest_volume = Vec::with_capacity(tets.len());
        let mut dfdx = Vec::with_capacity(tets.len());
        let mut mass = vec![0.0; vertices.len()];
        for (index, t) in tets.iter().enumerate() {
            let dm = edge_matrix(&vertices, t);
            let det = dm.determinant();
            let volume = det / 6.0;
            if !(volume > 0.0) {
                return Err(MeshError::InvertedTet { index, volume });
            }
            let inv = dm.try_inverse().ok_or(MeshError::InvertedTet { index, volume })?;
            for &v in t {
                mass[v] += tet_density[index] * volume / 4.0;
            }
            dm_inv.push(inv);
            rest_volume.push(volume);
            dfdx.push(shape_gradient(&inv));
        }

        if let Some(v) = mass.iter().position(|&m| m == 0.0) {
            return Err(MeshError::UnreferencedVertex(v));
        }

        let surface_faces = extract_surface(&tets);
        let (surface_edges, non_manifold_edges) = surface_edges(&surface_faces);
        if non_manifold_edges > 0 {
            log::warn!("surface has {non_manifold_edges} non-manifold edges");
        }
        let mut surface_vertices: Vec<usize> = surface_faces.iter().flatten().copied().collect();
        surface_vertices.sort_unstable();
        surface_vertices.dedup();

        Ok(TetMesh {
            vertices_rest: vertices,
            tets,
            surface_faces,
            surface_edges,
            surface_vertices,
            dm_inv,
            rest_volume,
            dfdx,
            mass,
            vertex_object,
            tet_object,
            object_vertices,
            non_manifold_edges,
        })
    }
}

impl<T: Real> TetMesh<T> {
    pub fn num_vertices(&self) -> usize {
        self.vertices_rest.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn num_objects(&self) -> usize {
        self.object_vertices.len()
    }

    /// Converts all stored scalars to another precision.
    pub fn cast<U: Real>(&self) -> TetMesh<U> {
        let c = |v: T| U::of(v.to_f64());
        TetMesh {
            vertices_rest: self.vertices_rest.iter().map(|v| v.map(c)).collect(),
            tets: self.tets.clone(),
            surface_faces: self.surface_faces.clone(),
            surface_edges: self.surface_edges.clone(),
            surface_vertices: self.surface_vertices.clone(),
            dm_inv: self.dm_inv.iter().map(|m| m.map(c)).collect(),
            rest_volume: self.rest_volume.iter().map(|&v| c(v)).collect(),
            dfdx: self.dfdx.iter().map(|m| m.map(c)).collect(),
            mass: self.mass.iter().map(|&v| c(v)).collect(),
            vertex_object: self.vertex_object.clone(),
            tet_object: self.tet_object.clone(),
            object_vertices: self.object_vertices.clone(),
            non_manifold_edges: self.non_manifold_edges,
        }
    }

    /// `F = Ds · Dm⁻¹` for tet `tet` at positions `x`.
    pub fn deformation_gradient(&self, x: &[Vector3<T>], tet: usize) -> Matrix3<T> {
        edge_matrix(x, &self.tets[tet]) * self.dm_inv[tet]
    }

    /// The stacked 12-vector of a tet's vertex positions.
    pub fn gather(&self, x: &[Vector3<T>], tet: usize) -> SMatrix<T, 12, 1> {
        let t = &self.tets[tet];
        SMatrix::<T, 12, 1>::from_fn(|r, _| x[t[r / 3]][r % 3])
    }

    /// Explicit 9×12 matrix of `∂vec(F)/∂x` (column-major `vec`).
    pub fn dfdx_dense(&self, tet: usize) -> SMatrix<T, 9, 12> {
        let d = &self.dfdx[tet];
        let mut m = SMatrix::<T, 9, 12>::zeros();
        for a in 0..4 {
            for j in 0..3 {
                for i in 0..3 {
                    m[(3 * j + i, 3 * a + i)] = d[(a, j)];
                }
            }
        }
        m
    }

    /// Average length of the surface edges at rest.
    pub fn average_surface_edge_length(&self) -> T {
        if self.surface_edges.is_empty() {
            return T::zero();
        }
        let sum = self.surface_edges.iter().fold(T::zero(), |acc, e| {
            acc + (self.vertices_rest[e[1]] - self.vertices_rest[e[0]]).norm()
        });
        sum / T::of(self.surface_edges.len() as f64)
    }

    pub fn total_mass(&self) -> T {
        self.mass.iter().fold(T::zero(), |a, &m| a + m)
    }
}

/// Free function form of [`TetMesh::deformation_gradient`].
pub fn compute_deformation_gradient<T: Real>(
    mesh: &TetMesh<T>,
    x: &[Vector3<T>],
    tet: usize,
) -> Matrix3<T> {
    mesh.deformation_gradient(x, tet)
}

/// Columns are `x1 − x0`, `x2 − x0`, `x3 − x0`.
#[inline]
pub(crate) fn edge_matrix<T: Real>(x: &[Vector3<T>], t: &[usize; 4]) -> Matrix3<T> {
    let x0 = x[t[0]];
    Matrix3::from_columns(&[x[t[1]] - x0, x[t[2]] - x0, x[t[3]] - x0])
}

/// Rows 1..3 of `D` are the rows of `Dm⁻¹`; row 0 makes each column sum to zero.
fn shape_gradient(dm_inv: &Matrix3<f64>) -> Matrix4x3<f64> {
    let mut d = Matrix4x3::zeros();
    for j in 0..3 {
        let mut s = 0.0;
        for k in 0..3 {
            d[(k + 1, j)] = dm_inv[(k, j)];
            s += dm_inv[(k, j)];
        }
        d[(0, j)] = -s;
    }
    d
}

/// Outward-oriented faces of a positively oriented tet `(a, b, c, d)`.
fn tet_faces(t: &[usize; 4]) -> [[usize; 3]; 4] {
    let [a, b, c, d] = *t;
    [[a, c, b], [a, b, d], [a, d, c], [b, c, d]]
}

fn extract_surface(tets: &[[usize; 4]]) -> Vec<[usize; 3]> {
    let mut count: FxHashMap<[usize; 3], (u32, [usize; 3])> = FxHashMap::default();
    let mut order = Vec::new();
    for t in tets {
        for f in tet_faces(t) {
            let mut key = f;
            key.sort_unstable();
            let e = count.entry(key).or_insert_with(|| {
                order.push(key);
                (0, f)
            });
            e.0 += 1;
        }
    }
    order
        .into_iter()
        .filter_map(|k| {
            let (n, f) = count[&k];
            (n == 1).then_some(f)
        })
        .collect()
}

fn surface_edges(faces: &[[usize; 3]]) -> (Vec<[usize; 2]>, usize) {
    let mut count: FxHashMap<[usize; 2], u32> = FxHashMap::default();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *count.entry([a.min(b), a.max(b)]).or_default() += 1;
        }
    }
    let non_manifold = count.values().filter(|&&n| n != 2).count();
    let mut edges: Vec<[usize; 2]> = count.into_keys().collect();
    edges.sort_unstable();
    (edges, non_manifold)
}
