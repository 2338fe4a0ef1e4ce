//! Uniform-grid spatial index in compressed-row form.

use crate::vec2::Vec2;

/// Cap on the number of cells relative to the atom count.
const MAX_CELLS_PER_ATOM: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct GridIndex {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    /// `start[c]..start[c + 1]` indexes `order` for cell `c`.
    start: Vec<u32>,
    /// Atom indices grouped by cell, ascending within each cell.
    order: Vec<u32>,
}

impl GridIndex {
    /// Cell size is the bounding-box diagonal over `√n`, clamped so the grid
    /// holds at most a few cells per atom.
    pub fn build(points: &[Vec2]) -> Self {
        let n = points.len();
        assert!(n < u32::MAX as usize, "too many atoms for a u32 index");
        let (lo, hi) = bbox(points);
        let ext = hi - lo;
        let diag = ext.norm();
        let mut cell = if n == 0 || diag == 0.0 {
            1.0
        } else {
            diag / (n as f64).sqrt()
        };
        let dims = |c: f64| {
            (
                ((ext.x / c).floor() as usize + 1).max(1),
                ((ext.y / c).floor() as usize + 1).max(1),
            )
        };
        let mut d = dims(cell);
        while d.0.saturating_mul(d.1) > MAX_CELLS_PER_ATOM * n.max(1) {
            cell *= 2.0;
            d = dims(cell);
        }
        let (nx, ny) = d;
        let mut idx = Self {
            origin: lo,
            cell,
            nx,
            ny,
            start: vec![0; nx * ny + 1],
            order: vec![0; n],
        };
        let cells: Vec<usize> = points.iter().map(|p| idx.cell_of(*p)).collect();
        for &c in &cells {
            idx.start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            idx.start[c + 1] += idx.start[c];
        }
        let mut fill = idx.start.clone();
        for (i, &c) in cells.iter().enumerate() {
            idx.order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        idx
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn clamp_coord(&self, v: f64, n: usize) -> usize {
        if v.is_nan() || v < 0.0 {
            0
        } else {
            (v as usize).min(n - 1)
        }
    }

    fn cell_of(&self, p: Vec2) -> usize {
        let i = self.clamp_coord((p.x - self.origin.x) / self.cell, self.nx);
        let j = self.clamp_coord((p.y - self.origin.y) / self.cell, self.ny);
        j * self.nx + i
    }

    /// Calls `f` with every atom index in cells meeting the box
    /// `[lo, hi]`; callers filter exactly.
    pub fn for_each_candidate(&self, lo: Vec2, hi: Vec2, mut f: impl FnMut(usize)) {
        if self.order.is_empty() {
            return;
        }
        let fx = |v: f64| (v - self.origin.x) / self.cell;
        let fy = |v: f64| (v - self.origin.y) / self.cell;
        if fx(hi.x) < 0.0 || fy(hi.y) < 0.0 {
            return;
        }
        let i0 = self.clamp_coord(fx(lo.x), self.nx);
        let i1 = self.clamp_coord(fx(hi.x), self.nx);
        let j0 = self.clamp_coord(fy(lo.y), self.ny);
        let j1 = self.clamp_coord(fy(hi.y), self.ny);
        for j in j0..=j1 {
            let row = j * self.nx;
            let a = self.start[row + i0] as usize;
            let b = self.start[row + i1 + 1] as usize;
            for &k in &self.order[a..b] {
                f(k as usize);
            }
        }
    }

    /// Indices of atoms inside the closed box `[lo, hi]`, ascending.
    pub fn query_box(&self, points: &[Vec2], lo: Vec2, hi: Vec2) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_candidate(lo, hi, |k| {
            let p = points[k];
            if p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y {
                out.push(k);
            }
        });
        out.sort_unstable();
        out
    }
}

/// Axis-aligned bounding box; the origin twice for an empty slice.
pub fn bbox(points: &[Vec2]) -> (Vec2, Vec2) {
    if points.is_empty() {
        return (Vec2::ZERO, Vec2::ZERO);
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_queries_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [0usize, 1, 2, 17, 500, 3000] {
            let pts: Vec<Vec2> = (0..n)
                .map(|_| Vec2::new(rng.gen_range(-1.0..3.0), rng.gen_range(0.0..0.5)))
                .collect();
            let idx = GridIndex::build(&pts);
            for _ in 0..50 {
                let a = Vec2::new(rng.gen_range(-2.0..4.0), rng.gen_range(-0.5..1.0));
                let b = a + Vec2::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..0.6));
                let got = idx.query_box(&pts, a, b);
                let want: Vec<usize> = (0..n)
                    .filter(|&k| {
                        let p = pts[k];
                        p.x >= a.x && p.x <= b.x && p.y >= a.y && p.y <= b.y
                    })
                    .collect();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn collinear_and_coincident_points() {
        let line: Vec<Vec2> = (0..100).map(|k| Vec2::new(k as f64, 0.0)).collect();
        let idx = GridIndex::build(&line);
        assert_eq!(idx.dims().1, 1);
        assert_eq!(idx.query_box(&line, Vec2::new(9.5, -1.0), Vec2::new(12.0, 0.0)), vec![10, 11, 12]);
        let same = vec![Vec2::new(1.0, 1.0); 5];
        let idx = GridIndex::build(&same);
        assert_eq!(idx.query_box(&same, same[0], same[0]).len(), 5);
    }
}
