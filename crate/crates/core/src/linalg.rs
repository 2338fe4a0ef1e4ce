//! Invertible 2×2 linear maps.

use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest accepted `|det| / (max |entry|)²`.
pub const CONDITION_GUARD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearMapError {
    #[error("singular map (det = {det:e})")]
    Singular { det: f64 },
    #[error("non-finite entry in linear map")]
    NonFinite,
}

/// An invertible 2×2 matrix with cached inverse. Serializes row-major as
/// `[a, b, c, d]` for `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LinearMap2 {
    m: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
    det: f64,
}

impl LinearMap2 {
    pub const IDENTITY: LinearMap2 = LinearMap2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
        inv: [[1.0, 0.0], [0.0, 1.0]],
        det: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, LinearMapError> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(LinearMapError::NonFinite);
        }
        let det = a * d - b * c;
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        if scale == 0.0 || det.abs() <= CONDITION_GUARD * scale * scale {
            return Err(LinearMapError::Singular { det });
        }
        Ok(Self {
            m: [[a, b], [c, d]],
            inv: [[d / det, -b / det], [-c / det, a / det]],
            det,
        })
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self, LinearMapError> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    /// Matrix whose columns are `c1` and `c2`.
    pub fn from_columns(c1: Vec2, c2: Vec2) -> Result<Self, LinearMapError> {
        Self::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn diag(a: f64, d: f64) -> Result<Self, LinearMapError> {
        Self::new(a, 0.0, 0.0, d)
    }

    /// Counterclockwise rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        // orthogonal: inverse is the transpose
        Self {
            m: [[c, -s], [s, c]],
            inv: [[c, s], [-s, c]],
            det: c * c + s * s,
        }
    }

    /// Rotation taking the direction of `d` to `e₁`.
    pub fn rotation_to_e1(d: Vec2) -> Self {
        Self::rotation(-d.y.atan2(d.x))
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    #[inline]
    pub fn apply_inverse(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.inv[0][0] * v.x + self.inv[0][1] * v.y,
            self.inv[1][0] * v.x + self.inv[1][1] * v.y,
        )
    }

    /// `A⁻ᵀ v`, the action on dual vectors.
    #[inline]
    pub fn apply_inverse_transpose(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.inv[0][0] * v.x + self.inv[1][0] * v.y,
            self.inv[0][1] * v.x + self.inv[1][1] * v.y,
        )
    }

    pub fn inverse(&self) -> Self {
        Self {
            m: self.inv,
            inv: self.m,
            det: 1.0 / self.det,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearMap2) -> Result<Self, LinearMapError> {
        let a = &self.m;
        let b = &other.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        singular_values(&self.m).0
    }

    /// Largest singular value of the inverse.
    pub fn inverse_operator_norm(&self) -> f64 {
        1.0 / singular_values(&self.m).1
    }

    pub fn max_abs_diff(&self, other: &LinearMap2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }
}

/// `(σ_max, σ_min)` of a 2×2 matrix in closed form.
fn singular_values(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = ((s1 - 2.0 * det) * (s1 + 2.0 * det)).max(0.0).sqrt();
    let smax = ((s1 + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smax, smin)
}

impl TryFrom<[f64; 4]> for LinearMap2 {
    type Error = LinearMapError;
    fn try_from(a: [f64; 4]) -> Result<Self, Self::Error> {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<LinearMap2> for [f64; 4] {
    fn from(m: LinearMap2) -> Self {
        [m.m[0][0], m.m[0][1], m.m[1][0], m.m[1][1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trips() {
        let a = LinearMap2::new(2.0, -1.0, 0.5, 3.0).unwrap();
        let id = a.compose(&a.inverse()).unwrap();
        assert!(id.max_abs_diff(&LinearMap2::IDENTITY) < 1e-12);
        let v = Vec2::new(0.3, -7.0);
        let w = a.apply_inverse(a.apply(v));
        assert!((w - v).norm() < 1e-12);
    }

    #[test]
    fn rejects_singular() {
        assert!(matches!(
            LinearMap2::new(1.0, 2.0, 2.0, 4.0),
            Err(LinearMapError::Singular { .. })
        ));
        assert!(LinearMap2::new(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn singular_values_of_diag() {
        let a = LinearMap2::diag(3.0, -0.5).unwrap();
        assert!((a.operator_norm() - 3.0).abs() < 1e-15);
        assert!((a.inverse_operator_norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_to_e1_aligns() {
        let d = Vec2::new(-2.0, 3.0);
        let r = LinearMap2::rotation_to_e1(d);
        let img = r.apply(d);
        assert!(img.y.abs() < 1e-15 && img.x > 0.0);
    }

    #[test]
    fn json_is_row_major() {
        let a = LinearMap2::new(1.0, -1.0, 0.0, -1.0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), "[1.0,-1.0,0.0,-1.0]");
        let b: LinearMap2 = serde_json::from_str("[1,-1,0,-1]").unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<LinearMap2>("[1,1,1,1]").is_err());
    }
}
