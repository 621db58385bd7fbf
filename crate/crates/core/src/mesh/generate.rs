//! Procedural meshes used by scenes and tests.

use super::MeshData;
use nalgebra::{Matrix3, Vector3};

/// The reference tet `(0,0,0), (1,0,0), (0,1,0), (0,0,1)`.
pub fn unit_tet() -> MeshData {
    MeshData {
        vertices: vec![
            Vector3::zeros(),
            Vector3::x(),
            Vector3::y(),
            Vector3::z(),
        ],
        tets: vec![[0, 1, 2, 3]],
    }
}

/// Unit cube split into one central and four corner tets.
pub fn unit_cube_five_tets() -> MeshData {
    let vertices = (0..8)
        .map(|i| Vector3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect::<Vec<_>>();
    let mut tets = vec![[0, 1, 2, 4], [3, 1, 2, 7], [5, 1, 4, 7], [6, 2, 4, 7], [1, 2, 4, 7]];
    for t in &mut tets {
        orient(&vertices, t);
    }
    MeshData { vertices, tets }
}

/// Axis-aligned box `[0, size]` with `cells` subdivisions per axis, six tets
/// per cell. Every cell is cut along the same main diagonal, so neighbouring
/// cells share conforming faces.
pub fn box_grid(cells: [usize; 3], size: Vector3<f64>) -> MeshData {
    let [nx, ny, nz] = cells;
    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Vector3::new(
                    size.x * i as f64 / nx as f64,
                    size.y * j as f64 / ny as f64,
                    size.z * k as f64 / nz as f64,
                ));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut t = [id(i, j, k), 0, 0, 0];
                    for (s, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    orient(&vertices, &mut t);
                    tets.push(t);
                }
            }
        }
    }
    MeshData { vertices, tets }
}

fn orient(vertices: &[Vector3<f64>], t: &mut [usize; 4]) {
    let x0 = vertices[t[0]];
    let dm = Matrix3::from_columns(&[
        vertices[t[1]] - x0,
        vertices[t[2]] - x0,
        vertices[t[3]] - x0,
    ]);
    if dm.determinant() < 0.0 {
        t.swap(2, 3);
    }
}
