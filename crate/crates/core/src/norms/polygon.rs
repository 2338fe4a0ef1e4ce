//! Origin-symmetric convex polygon gauges with exact edge functionals.

use super::RAY_TOL;
use crate::linalg::LinearMap2;
use crate::vec2::Vec2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("polygon needs an even number of at least 4 vertices, got {0}")]
    VertexCount(usize),
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
    #[error("vertices are not antipodal pairs (v[i + n/2] = -v[i])")]
    NotSymmetric,
    #[error("vertices are not in strictly counterclockwise convex position around the origin (at vertex {0})")]
    NotConvex(usize),
}

/// Unit ball `conv{v₀, …, v_{n−1}}` with `v_{i+n/2} = −v_i` exactly.
///
/// Edge `i` joins `v_i` to `v_{i+1}`; its functional `a_i` satisfies
/// `⟨a_i, v_i⟩ = ⟨a_i, v_{i+1}⟩ = 1`, so the gauge is `max_i ⟨a_i, x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonNorm {
    vertices: Vec<Vec2>,
    functionals: Vec<Vec2>,
}

impl PolygonNorm {
    /// Validates a full, counterclockwise, antipodal vertex list.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, PolygonError> {
        let n = vertices.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(PolygonError::VertexCount(n));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(PolygonError::NonFinite(i));
        }
        if !is_antipodal(&vertices) {
            return Err(PolygonError::NotSymmetric);
        }
        let m = n / 2;
        // start at the smallest angle; snap the second half to exact negations
        let start = (0..n)
            .min_by(|&i, &j| vertices[i].angle().total_cmp(&vertices[j].angle()))
            .unwrap_or(0);
        let first: Vec<Vec2> = (0..m).map(|k| vertices[(start + k) % n]).collect();
        let mut verts = first.clone();
        verts.extend(first.iter().map(|v| -*v));

        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let c = verts[(i + 2) % n];
            if a.cross(b) <= 0.0 || (b - a).cross(c - b) <= 0.0 {
                return Err(PolygonError::NotConvex(i));
            }
        }
        // consecutive positive cross products could still wind twice
        let turn: f64 = (0..n)
            .map(|i| {
                let a = verts[i];
                let b = verts[(i + 1) % n];
                a.cross(b).atan2(a.dot(b))
            })
            .sum();
        if (turn - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(PolygonError::NotConvex(0));
        }

        let half: Vec<Vec2> = (0..m)
            .map(|i| edge_functional(verts[i], verts[i + 1]))
            .collect();
        let mut functionals = half.clone();
        functionals.extend(half.iter().map(|a| -*a));
        Ok(Self {
            vertices: verts,
            functionals,
        })
    }

    /// Accepts either a full antipodal list or a counterclockwise half-chain,
    /// which is closed by appending the negated vertices.
    pub fn with_antipodal_closure(vertices: Vec<Vec2>) -> Result<Self, PolygonError> {
        if vertices.len().is_multiple_of(2) && vertices.len() >= 4 && is_antipodal(&vertices) {
            return Self::new(vertices);
        }
        let mut full = vertices.clone();
        full.extend(vertices.iter().map(|v| -*v));
        Self::new(full)
    }

    /// Regular polygon with `n` vertices on the unit circle, the first at
    /// angle `phase`.
    pub fn regular(n: usize, phase: f64) -> Result<Self, PolygonError> {
        let verts = (0..n)
            .map(|k| Vec2::from_angle(phase + std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn functionals(&self) -> &[Vec2] {
        &self.functionals
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Index of an edge whose functional attains the gauge at `x`.
    #[inline]
    pub fn active_edge(&self, x: Vec2) -> (usize, f64) {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, a) in self.functionals.iter().enumerate() {
            let v = a.dot(x);
            if v > val {
                val = v;
                best = i;
            }
        }
        (best, val)
    }

    #[inline]
    pub fn eval(&self, x: Vec2) -> f64 {
        self.active_edge(x).1.max(0.0)
    }

    /// Vertex index whose ray carries `x`, if any.
    pub fn vertex_on_ray(&self, x: Vec2) -> Option<usize> {
        if x == Vec2::ZERO {
            return None;
        }
        let n = self.len();
        let (i, _) = self.active_edge(x);
        [i, (i + 1) % n].into_iter().find(|&k| {
            let v = self.vertices[k];
            v.dot(x) > 0.0 && v.cross(x).abs() <= RAY_TOL * v.norm() * x.norm()
        })
    }

    /// Image polygon `A·K`, reordered to stay counterclockwise.
    pub fn transformed(&self, map: &LinearMap2) -> Result<Self, PolygonError> {
        let mut verts: Vec<Vec2> = self.vertices.iter().map(|v| map.apply(*v)).collect();
        if map.det() < 0.0 {
            verts.reverse();
        }
        Self::new(verts)
    }

    /// Area of the unit ball (shoelace).
    pub fn area(&self) -> f64 {
        let n = self.len();
        0.5 * (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn inradius(&self) -> f64 {
        self.functionals
            .iter()
            .map(|a| 1.0 / a.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

fn edge_functional(a: Vec2, b: Vec2) -> Vec2 {
    let e = b - a;
    let normal = Vec2::new(e.y, -e.x);
    normal / a.cross(b)
}

fn is_antipodal(vs: &[Vec2]) -> bool {
    let n = vs.len();
    if !n.is_multiple_of(2) {
        return false;
    }
    let m = n / 2;
    let scale = vs.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
    (0..m).all(|i| (vs[i] + vs[i + m]).max_abs() <= 1e-9 * scale)
}
