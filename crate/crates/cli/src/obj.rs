//! Wavefront OBJ surface frames.

use nalgebra::Vector3;
use pncg_core::mesh::TetMesh;
use pncg_core::Real;
use std::io::{self, BufRead, Write};

/// Surface of `mesh` at positions `x`: surface vertices only, renumbered in
/// ascending order, faces 1-indexed. Coordinates are printed in shortest
/// round-trip form.
pub fn write_surface_obj<T: Real, W: Write>(mut w: W, mesh: &TetMesh<T>, x: &[Vector3<T>], comment: &str) -> io::Result<()> {
    let mut local = vec![usize::MAX; x.len()];
    for (k, &v) in mesh.surface_vertices.iter().enumerate() {
        local[v] = k + 1;
    }
    if !comment.is_empty() {
        writeln!(w, "# {comment}")?;
    }
    for &v in &mesh.surface_vertices {
        let p = x[v];
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for f in &mesh.surface_faces {
        writeln!(w, "f {} {} {}", local[f[0]], local[f[1]], local[f[2]])?;
    }
    Ok(())
}

/// Triangle soup read back from an OBJ file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjSurface {
    pub vertices: Vec<Vector3<f64>>,
    /// 0-indexed.
    pub faces: Vec<[usize; 3]>,
}

#[derive(Debug, thiserror::Error)]
pub enum ObjError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Reads `v` and triangular `f` records; other records are ignored.
/// Face entries may carry `/vt/vn` suffixes and negative (relative) indices.
pub fn read_obj<R: BufRead>(r: R) -> Result<ObjSurface, ObjError> {
    let mut out = ObjSurface::default();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let err = |msg: String| ObjError::Parse { line: lineno, msg };
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|e| err(format!("bad coordinate `{s}`: {e}"))))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                out.vertices.push(Vector3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let n = out.vertices.len() as i64;
                let idx: Vec<usize> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|e| err(format!("bad index `{s}`: {e}")))?;
                        let k = if k < 0 { n + k } else { k - 1 };
                        if k < 0 || k >= n {
                            return Err(err(format!("index {s} out of range")));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    out.faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

impl ObjSurface {
    /// Sorted unique undirected edges of the faces.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut e: Vec<[usize; 2]> = self
            .faces
            .iter()
            .flat_map(|f| [[f[0], f[1]], [f[1], f[2]], [f[2], f[0]]])
            .map(|[a, b]| [a.min(b), a.max(b)])
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pncg_core::mesh::{unit_cube_five_tets, TetMesh};

    #[test]
    fn round_trip_is_exact() {
        let mesh = TetMesh::new(unit_cube_five_tets(), 1.0).unwrap();
        let x: Vec<_> = mesh.vertices_rest.iter().map(|p| p * 0.1 + Vector3::new(1.0 / 3.0, 0.0, 1e-17)).collect();
        let mut buf = Vec::new();
        write_surface_obj(&mut buf, &mesh, &x, "frame 1").unwrap();
        let s = read_obj(buf.as_slice()).unwrap();
        assert_eq!(s.faces.len(), 12);
        assert_eq!(s.edges().len(), 18);
        for (k, &v) in mesh.surface_vertices.iter().enumerate() {
            assert_eq!(s.vertices[k], x[v]);
        }
    }

    #[test]
    fn parses_extended_face_records() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nvn 0 0 1\nf 1//1 2//1 4//1 3//1\nf -4 -3 -2\n";
        let s = read_obj(src.as_bytes()).unwrap();
        assert_eq!(s.faces, vec![[0, 1, 3], [0, 3, 2], [0, 1, 2]]);
        assert!(read_obj("v 0 0\n".as_bytes()).is_err());
        assert!(read_obj("v 0 0 0\nf 1 2 3\n".as_bytes()).is_err());
    }
}
