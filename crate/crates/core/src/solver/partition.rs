//! Vertex regions that receive their own step size and direction.

use crate::contact::{ContactConstraint, ContactKind};
use crate::mesh::TetMesh;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Region of every vertex.
    pub vertex_region: Vec<u32>,
    /// Vertices of each region, ascending.
    pub members: Vec<Vec<usize>>,
    /// Tets with at least one vertex in each region, ascending.
    pub elements: Vec<Vec<usize>>,
}

impl Partition {
    fn from_labels<T: Real>(mesh: &TetMesh<T>, labels: Vec<u32>, regions: usize) -> Self {
        let mut members = vec![Vec::new(); regions];
        for (v, &r) in labels.iter().enumerate() {
            members[r as usize].push(v);
        }
        let mut elements = vec![Vec::new(); regions];
        for (e, tet) in mesh.tets.iter().enumerate() {
            let mut seen = [u32::MAX; 4];
            for (k, &v) in tet.iter().enumerate() {
                let r = labels[v];
                if !seen[..k].contains(&r) {
                    elements[r as usize].push(e);
                }
                seen[k] = r;
            }
        }
        Partition {
            vertex_region: labels,
            members,
            elements,
        }
    }

    /// Everything in one region.
    pub fn single<T: Real>(mesh: &TetMesh<T>) -> Self {
        Self::from_labels(mesh, vec![0; mesh.num_vertices()], 1)
    }

    pub fn per_object<T: Real>(mesh: &TetMesh<T>) -> Self {
        let labels = mesh.vertex_object.iter().map(|&o| o as u32).collect();
        Self::from_labels(mesh, labels, mesh.num_objects().max(1))
    }

    /// Region 0: vertices of active constraints plus every vertex of a tet
    /// touching one; region 1: the rest.
    pub fn collision<T: Real>(mesh: &TetMesh<T>, constraints: &[ContactConstraint<T>]) -> Self {
        let mut hit = vec![false; mesh.num_vertices()];
        for c in constraints {
            let n = if c.kind == ContactKind::Ground { 1 } else { 4 };
            for &v in &c.verts[..n] {
                hit[v] = true;
            }
        }
        let mut grown = hit.clone();
        for tet in &mesh.tets {
            if tet.iter().any(|&v| hit[v]) {
                for &v in tet {
                    grown[v] = true;
                }
            }
        }
        let labels = grown.iter().map(|&h| if h { 0 } else { 1 }).collect();
        Self::from_labels(mesh, labels, 2)
    }

    pub fn num_regions(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn region(&self, v: usize) -> usize {
        self.vertex_region[v] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{box_grid, ObjectGeometry};
    use nalgebra::{Matrix3, Vector3};

    fn two_boxes() -> TetMesh {
        let a = box_grid([1, 1, 1], Vector3::repeat(1.0));
        let b = a.clone().transformed(Vector3::repeat(1.0), &Matrix3::identity(), Vector3::new(3.0, 0.0, 0.0));
        TetMesh::from_objects(vec![
            ObjectGeometry { data: a.clone(), density: 1.0 },
            ObjectGeometry { data: b, density: 1.0 },
        ])
        .unwrap()
    }

    #[test]
    fn per_object_regions_are_whole_objects() {
        let mesh = two_boxes();
        let p = Partition::per_object(&mesh);
        assert_eq!(p.num_regions(), 2);
        assert_eq!(p.members[0], (0..8).collect::<Vec<_>>());
        assert_eq!(p.members[1], (8..16).collect::<Vec<_>>());
        assert_eq!(p.elements[0], (0..6).collect::<Vec<_>>());
        assert_eq!(p.elements[1], (6..12).collect::<Vec<_>>());
        let single = Partition::single(&mesh);
        assert_eq!(single.members[0].len(), 16);
        assert_eq!(single.elements[0].len(), 12);
    }

    #[test]
    fn collision_region_grows_by_one_ring() {
        let mesh = two_boxes();
        let c = ContactConstraint {
            kind: ContactKind::Ground,
            verts: [0; 4],
            c: [1.0, 0.0, 0.0, 0.0],
            t: Vector3::new(0.0, 0.0, 0.1),
            d: 0.1,
        };
        let p = Partition::collision(&mesh, &[c]);
        assert!(p.members[0].contains(&0));
        assert!(p.members[0].iter().all(|&v| v < 8));
        assert!(p.members[1].iter().all(|&v| v != 0));
        assert_eq!(p.members[0].len() + p.members[1].len(), 16);
    }
}
