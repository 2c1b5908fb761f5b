//! Uniform-grid spatial index for fixed-radius neighbor queries over the
//! disk. Buckets hold `(id, position)` pairs so scans stay cache-local.

use crate::geometry::Point;

/// Square lattice of cells covering `[-half_extent, half_extent]²`.
#[derive(Debug, Clone, Copy)]
pub struct CellGrid {
    min: f64,
    cell: f64,
    dim: usize,
}

/// Upper bound on cells per axis; keeps tiny query radii from exploding memory.
const MAX_DIM: usize = 2048;

impl CellGrid {
    pub fn new(half_extent: f64, cell_size: f64) -> Self {
        let span = 2.0 * half_extent;
        let mut cell = cell_size.max(span / MAX_DIM as f64);
        if !(cell > 0.0) {
            cell = 1.0;
        }
        let dim = ((span / cell).ceil() as usize).max(1);
        Self {
            min: -half_extent,
            cell,
            dim,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    fn axis(&self, v: f64) -> usize {
        let c = ((v - self.min) / self.cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.dim - 1)
        }
    }

    pub fn coords(&self, p: Point) -> (usize, usize) {
        (self.axis(p.x), self.axis(p.y))
    }

    pub fn index_of(&self, p: Point) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.dim + cx
    }

    pub fn index(&self, cx: usize, cy: usize) -> usize {
        cy * self.dim + cx
    }

    /// Inclusive cell-coordinate ranges overlapping the box `p ± r`.
    pub fn span(&self, p: Point, r: f64) -> (usize, usize, usize, usize) {
        let (x0, y0) = self.coords(Point::new(p.x - r, p.y - r));
        let (x1, y1) = self.coords(Point::new(p.x + r, p.y + r));
        (x0, x1, y0, y1)
    }

    /// Squared min and max distance from `p` to the rectangle of cell `(cx, cy)`.
    pub fn rect_distance_sq(&self, p: Point, cx: usize, cy: usize) -> (f64, f64) {
        let lo_x = self.min + cx as f64 * self.cell;
        let lo_y = self.min + cy as f64 * self.cell;
        let (hi_x, hi_y) = (lo_x + self.cell, lo_y + self.cell);
        let near = |v: f64, lo: f64, hi: f64| {
            if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            }
        };
        let far = |v: f64, lo: f64, hi: f64| (v - lo).abs().max((hi - v).abs());
        let (nx, ny) = (near(p.x, lo_x, hi_x), near(p.y, lo_y, hi_y));
        let (fx, fy) = (far(p.x, lo_x, hi_x), far(p.y, lo_y, hi_y));
        (nx * nx + ny * ny, fx * fx + fy * fy)
    }
}

/// Points bucketed by grid cell, supporting insertion and strict-radius queries
/// (`distance < radius`). Stored points must lie inside the grid extent;
/// query points may lie anywhere.
#[derive(Debug, Clone)]
pub struct PointBuckets {
    grid: CellGrid,
    buckets: Vec<Vec<(u32, Point)>>,
    len: usize,
}

impl PointBuckets {
    pub fn new(grid: CellGrid) -> Self {
        Self {
            grid,
            buckets: vec![Vec::new(); grid.len()],
            len: 0,
        }
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts and returns the cell index the point landed in.
    pub fn insert(&mut self, id: u32, p: Point) -> usize {
        debug_assert!(p.x.abs() <= -self.grid.min && p.y.abs() <= -self.grid.min);
        let idx = self.grid.index_of(p);
        self.buckets[idx].push((id, p));
        self.len += 1;
        idx
    }

    pub fn bucket(&self, idx: usize) -> &[(u32, Point)] {
        &self.buckets[idx]
    }

    /// True when at least `k` stored points lie strictly within `radius` of `p`.
    pub fn has_at_least(&self, p: Point, radius: f64, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        let r_sq = radius * radius;
        let (x0, x1, y0, y1) = self.grid.span(p, radius);
        let mut count = 0usize;
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let bucket = &self.buckets[self.grid.index(cx, cy)];
                if bucket.is_empty() {
                    continue;
                }
                let (min_sq, max_sq) = self.grid.rect_distance_sq(p, cx, cy);
                if min_sq >= r_sq {
                    continue;
                }
                if max_sq < r_sq {
                    count += bucket.len();
                } else {
                    for &(_, q) in bucket {
                        if p.distance_sq(q) < r_sq {
                            count += 1;
                            if count >= k {
                                return true;
                            }
                        }
                    }
                }
                if count >= k {
                    return true;
                }
            }
        }
        false
    }

    /// Every stored point strictly within `radius` of `p`, as `(id, point, distance²)`.
    pub fn within(&self, p: Point, radius: f64) -> Vec<(u32, Point, f64)> {
        let mut out = Vec::new();
        self.for_each_within(p, radius, |id, q, d_sq| out.push((id, q, d_sq)));
        out
    }

    pub fn for_each_within(&self, p: Point, radius: f64, mut f: impl FnMut(u32, Point, f64)) {
        let r_sq = radius * radius;
        let (x0, x1, y0, y1) = self.grid.span(p, radius);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let (min_sq, _) = self.grid.rect_distance_sq(p, cx, cy);
                if min_sq >= r_sq {
                    continue;
                }
                for &(id, q) in &self.buckets[self.grid.index(cx, cy)] {
                    let d_sq = p.distance_sq(q);
                    if d_sq < r_sq {
                        f(id, q, d_sq);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn queries_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point> = (0..2000)
            .map(|_| Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
            .collect();
        for cell in [1.0, 3.3, 7.0, 40.0] {
            let mut b = PointBuckets::new(CellGrid::new(50.0, cell));
            for (i, &p) in pts.iter().enumerate() {
                b.insert(i as u32, p);
            }
            for _ in 0..100 {
                let q = Point::new(rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0));
                let r = rng.random_range(0.1..15.0);
                let mut expected: Vec<u32> = pts
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.distance(q) < r)
                    .map(|(i, _)| i as u32)
                    .collect();
                let mut got: Vec<u32> = b.within(q, r).into_iter().map(|(i, _, _)| i).collect();
                expected.sort_unstable();
                got.sort_unstable();
                assert_eq!(got, expected);
                for k in 0..5 {
                    assert_eq!(b.has_at_least(q, r, k), expected.len() >= k);
                }
            }
        }
    }

    #[test]
    fn tiny_cells_are_capped() {
        let g = CellGrid::new(300.0, 1e-6);
        assert!(g.dim() <= MAX_DIM);
        assert_eq!(g.index_of(Point::new(1e9, -1e9)), g.index(g.dim() - 1, 0));
    }
}
