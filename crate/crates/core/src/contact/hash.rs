//! Grid-based spatial hashing for broad-phase culling.
//!
//! Boxes are rasterized into the cells of a uniform grid and each cell is
//! hashed into a fixed-size table (dense counting-sort layout: one prefix-sum
//! array plus one flat entry array). Hash collisions only add candidates;
//! queries filter by an exact box-overlap test afterwards.

use crate::real::Real;
use nalgebra::Vector3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T: Real> {
    pub min: Vector3<T>,
    pub max: Vector3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn from_points(points: &[Vector3<T>]) -> Self {
        let mut b = Aabb {
            min: points[0],
            max: points[0],
        };
        for p in &points[1..] {
            b.min = b.min.inf(p);
            b.max = b.max.sup(p);
        }
        b
    }

    pub fn inflated(mut self, r: T) -> Self {
        self.min.add_scalar_mut(-r);
        self.max.add_scalar_mut(r);
        self
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        (0..3).all(|k| self.min[k] <= o.max[k] && o.min[k] <= self.max[k])
    }
}

#[derive(Debug, Clone)]
pub struct SpatialHash<T: Real> {
    cell_size: T,
    start: Vec<u32>,
    entries: Vec<u32>,
    boxes: Vec<Aabb<T>>,
}

#[inline]
fn hash_cell(c: [i64; 3], table: usize) -> usize {
    let h = (c[0].wrapping_mul(92_837_111)) ^ (c[1].wrapping_mul(689_287_499)) ^ (c[2].wrapping_mul(283_923_481));
    (h.unsigned_abs() % table as u64) as usize
}

impl<T: Real> SpatialHash<T> {
    fn cell_range(&self, b: &Aabb<T>) -> ([i64; 3], [i64; 3]) {
        let cell = |v: T| (v / self.cell_size).floor().to_f64() as i64;
        (
            [cell(b.min.x), cell(b.min.y), cell(b.min.z)],
            [cell(b.max.x), cell(b.max.y), cell(b.max.z)],
        )
    }

    /// Hashes `boxes` (already inflated by the caller) into cells of edge `cell_size`.
    pub fn build(boxes: Vec<Aabb<T>>, cell_size: T) -> Self {
        assert!(cell_size > T::zero(), "cell size must be positive");
        let table = (2 * boxes.len()).max(64);
        let mut h = SpatialHash {
            cell_size,
            start: vec![0; table + 1],
            entries: Vec::new(),
            boxes,
        };
        let mut cells: Vec<(u32, u32)> = Vec::with_capacity(h.boxes.len() * 2);
        for (i, b) in h.boxes.iter().enumerate() {
            let (lo, hi) = h.cell_range(b);
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        cells.push((hash_cell([x, y, z], table) as u32, i as u32));
                    }
                }
            }
        }
        for &(slot, _) in &cells {
            h.start[slot as usize + 1] += 1;
        }
        for k in 0..table {
            h.start[k + 1] += h.start[k];
        }
        let mut fill = h.start.clone();
        h.entries = vec![0; cells.len()];
        for &(slot, i) in &cells {
            h.entries[fill[slot as usize] as usize] = i;
            fill[slot as usize] += 1;
        }
        h
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Sorted, deduplicated indices of stored boxes overlapping `query`.
    pub fn query(&self, query: &Aabb<T>) -> Vec<usize> {
        let mut out = Vec::new();
        self.query_into(query, &mut out);
        out
    }

    pub fn query_into(&self, query: &Aabb<T>, out: &mut Vec<usize>) {
        self.collect(query, true, out);
    }

    /// Everything sharing a hashed cell with `query`, without the overlap filter.
    pub fn candidates(&self, query: &Aabb<T>) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(query, false, &mut out);
        out
    }

    fn collect(&self, query: &Aabb<T>, filter: bool, out: &mut Vec<usize>) {
        out.clear();
        let table = self.start.len() - 1;
        let (lo, hi) = self.cell_range(query);
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let slot = hash_cell([x, y, z], table);
                    for &i in &self.entries[self.start[slot] as usize..self.start[slot + 1] as usize] {
                        let i = i as usize;
                        if !filter || self.boxes[i].overlaps(query) {
                            out.push(i);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}
