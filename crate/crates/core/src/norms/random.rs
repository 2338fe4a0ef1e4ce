//! Seeded random polygon norms: points on a random ellipse with radial
//! jitter, symmetrized and convexified.

use super::{NormDescriptor, PolygonNorm};
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPolygonSpec {
    /// Number of sampled points before symmetrization (`k` in `2k`).
    pub half_vertices: usize,
    pub seed: u64,
}

impl RandomPolygonSpec {
    pub fn new(half_vertices: usize, seed: u64) -> Self {
        Self {
            half_vertices,
            seed,
        }
    }
}

/// Draws a symmetric convex polygon norm. Hull steps may drop points, so the
/// vertex count is at most `2·half_vertices` and always at least 4.
pub fn random_polygon(spec: RandomPolygonSpec) -> NormDescriptor {
    let k = spec.half_vertices.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    loop {
        let a = rng.gen_range(0.5..1.5);
        let b = rng.gen_range(0.5..1.5);
        let phi = rng.gen_range(0.0..PI);
        let (s, c) = phi.sin_cos();
        let mut pts = Vec::with_capacity(2 * k);
        for _ in 0..k {
            let t = rng.gen_range(0.0..PI);
            let jitter = rng.gen_range(0.85..1.15);
            let e = Vec2::new(a * t.cos(), b * t.sin()) * jitter;
            pts.push(Vec2::new(c * e.x - s * e.y, s * e.x + c * e.y));
        }
        let half = pts.clone();
        pts.extend(half.iter().map(|p| -*p));
        let hull = convex_hull(pts);
        if hull.len() >= 4 {
            if let Ok(p) = PolygonNorm::new(hull) {
                return NormDescriptor::Polygon(p);
            }
        }
    }
}

/// Andrew's monotone chain; counterclockwise, collinear points removed.
/// Negating every input point negates the output exactly, since each
/// orientation test is computed from exactly negated differences.
fn convex_hull(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    pts.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        for seed in 0..50 {
            let spec = RandomPolygonSpec::new(6, seed);
            let a = random_polygon(spec);
            assert_eq!(a, random_polygon(spec));
            let p = a.as_polygon().unwrap();
            assert!(p.len() >= 4 && p.len() <= 12);
        }
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.5, 0.0),
        ];
        assert_eq!(convex_hull(pts).len(), 4);
    }
}
