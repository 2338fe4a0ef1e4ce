//! Planar norms: evaluation, subdifferentials, gradients of `‖·‖²`,
//! non-differentiability rays and the polarization form
//! `V(z, y) = (‖z‖² + ‖y‖² − ‖z − y‖²) / 2`.

mod polygon;
mod random;

pub use polygon::{PolygonError, PolygonNorm};
pub use random::{random_polygon, RandomPolygonSpec};

use crate::linalg::{LinearMap2, LinearMapError};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use thiserror::Error;

/// Relative tolerance for deciding that a point lies on a
/// non-differentiability ray.
pub const RAY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("invalid norm descriptor: {0}")]
    InvalidDescriptor(String),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    LinearMap(#[from] LinearMapError),
    #[error("norm is not differentiable at ({}, {})", .0.x, .0.y)]
    OnRay(Vec2),
}

/// Exponent of an `ℓᵖ` norm, `p ∈ [1, ∞]`. Infinity is a distinct value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(FiniteP),
    Infinity,
}

/// A finite exponent `p ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteP(f64);

impl FiniteP {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, NormError> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(FiniteP(p)))
        } else {
            Err(NormError::InvalidDescriptor(format!(
                "lp exponent must lie in [1, inf], got {p}"
            )))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p.0,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

/// A planar norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSpec", into = "NormSpec")]
pub enum NormDescriptor {
    Euclidean,
    Lp(Exponent),
    Polygon(PolygonNorm),
    /// `‖x‖_A = ‖A⁻¹x‖_inner`; the unit ball is `A·K_inner`.
    LinearImage {
        map: LinearMap2,
        inner: Box<NormDescriptor>,
    },
}

/// How `∇‖·‖²` treats points on a non-differentiability ray.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayPolicy {
    Error,
    /// Midpoint of the subdifferential segment; callers count these.
    #[default]
    Midpoint,
}

/// Value of `∇‖·‖²` together with whether the ray surrogate was used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gradient {
    pub value: Vec2,
    pub on_ray: bool,
}

/// Segment `[v_minus, v_plus]` of dual vectors, listed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubdifferentialSegment {
    pub v_minus: Vec2,
    pub v_plus: Vec2,
    pub degenerate: bool,
}

impl SubdifferentialSegment {
    fn singleton(v: Vec2) -> Self {
        Self {
            v_minus: v,
            v_plus: v,
            degenerate: true,
        }
    }

    pub fn midpoint(&self) -> Vec2 {
        (self.v_minus + self.v_plus) * 0.5
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.v_minus.lerp(self.v_plus, t)
    }

    fn mapped(self, f: impl Fn(Vec2) -> Vec2) -> Self {
        Self {
            v_minus: f(self.v_minus),
            v_plus: f(self.v_plus),
            degenerate: self.degenerate,
        }
    }
}

/// Result of [`NormDescriptor::subdifferential`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Subdifferential {
    /// At the origin the subdifferential is the whole dual unit ball.
    Origin,
    Segment(SubdifferentialSegment),
}

impl Subdifferential {
    pub fn segment(self) -> Option<SubdifferentialSegment> {
        match self {
            Subdifferential::Origin => None,
            Subdifferential::Segment(s) => Some(s),
        }
    }
}

impl NormDescriptor {
    pub fn lp(p: f64) -> Result<Self, NormError> {
        Ok(NormDescriptor::Lp(Exponent::new(p)?))
    }

    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self, NormError> {
        Ok(NormDescriptor::Polygon(PolygonNorm::new(vertices)?))
    }

    pub fn linear_image(map: LinearMap2, inner: NormDescriptor) -> Self {
        NormDescriptor::LinearImage {
            map,
            inner: Box::new(inner),
        }
    }

    /// Short human-readable label, used in reports.
    pub fn label(&self) -> String {
        match self {
            NormDescriptor::Euclidean => "euclidean".into(),
            NormDescriptor::Lp(Exponent::Infinity) => "lp(inf)".into(),
            NormDescriptor::Lp(Exponent::Finite(p)) => format!("lp({})", p.0),
            NormDescriptor::Polygon(p) => format!("polygon({})", p.len()),
            NormDescriptor::LinearImage { inner, .. } => format!("linear_image({})", inner.label()),
        }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        match self {
            NormDescriptor::Euclidean => x.norm(),
            NormDescriptor::Lp(Exponent::Infinity) => x.max_abs(),
            NormDescriptor::Lp(Exponent::Finite(p)) => lp_eval(p.0, x),
            NormDescriptor::Polygon(poly) => poly.eval(x),
            NormDescriptor::LinearImage { map, inner } => inner.eval(map.apply_inverse(x)),
        }
    }

    /// Point of the unit sphere in the direction of `u ≠ 0`.
    pub fn boundary_point(&self, u: Vec2) -> Vec2 {
        u / self.eval(u)
    }

    pub fn is_on_ray(&self, x: Vec2) -> bool {
        if x == Vec2::ZERO {
            return false;
        }
        match self {
            NormDescriptor::Euclidean => false,
            NormDescriptor::Lp(Exponent::Finite(p)) if p.0 > 1.0 => false,
            NormDescriptor::Lp(Exponent::Finite(_)) => {
                x.x.abs() <= RAY_TOL * x.y.abs() || x.y.abs() <= RAY_TOL * x.x.abs()
            }
            NormDescriptor::Lp(Exponent::Infinity) => {
                (x.x.abs() - x.y.abs()).abs() <= RAY_TOL * x.max_abs()
            }
            NormDescriptor::Polygon(poly) => poly.vertex_on_ray(x).is_some(),
            NormDescriptor::LinearImage { map, inner } => inner.is_on_ray(map.apply_inverse(x)),
        }
    }

    /// All subgradients of `‖·‖` at `x`.
    pub fn subdifferential(&self, x: Vec2) -> Subdifferential {
        if x == Vec2::ZERO {
            return Subdifferential::Origin;
        }
        let seg = match self {
            NormDescriptor::Euclidean => SubdifferentialSegment::singleton(x / x.norm()),
            NormDescriptor::Lp(Exponent::Finite(p)) if p.0 > 1.0 => {
                SubdifferentialSegment::singleton(lp_unit_gradient(p.0, x))
            }
            NormDescriptor::Lp(Exponent::Finite(_)) => {
                let on_x_axis = x.y.abs() <= RAY_TOL * x.x.abs();
                let on_y_axis = x.x.abs() <= RAY_TOL * x.y.abs();
                if on_x_axis {
                    let s = x.x.signum();
                    // counterclockwise order around x
                    SubdifferentialSegment {
                        v_minus: Vec2::new(s, -s),
                        v_plus: Vec2::new(s, s),
                        degenerate: false,
                    }
                } else if on_y_axis {
                    let s = x.y.signum();
                    SubdifferentialSegment {
                        v_minus: Vec2::new(s, s),
                        v_plus: Vec2::new(-s, s),
                        degenerate: false,
                    }
                } else {
                    SubdifferentialSegment::singleton(Vec2::new(x.x.signum(), x.y.signum()))
                }
            }
            NormDescriptor::Lp(Exponent::Infinity) => {
                let (ax, ay) = (x.x.abs(), x.y.abs());
                if (ax - ay).abs() <= RAY_TOL * x.max_abs() {
                    let (sx, sy) = (x.x.signum(), x.y.signum());
                    let ex = Vec2::new(sx, 0.0);
                    let ey = Vec2::new(0.0, sy);
                    // counterclockwise: the functional met first when rotating
                    // about the origin through x
                    if sx * sy > 0.0 {
                        SubdifferentialSegment {
                            v_minus: ex,
                            v_plus: ey,
                            degenerate: false,
                        }
                    } else {
                        SubdifferentialSegment {
                            v_minus: ey,
                            v_plus: ex,
                            degenerate: false,
                        }
                    }
                } else if ax > ay {
                    SubdifferentialSegment::singleton(Vec2::new(x.x.signum(), 0.0))
                } else {
                    SubdifferentialSegment::singleton(Vec2::new(0.0, x.y.signum()))
                }
            }
            NormDescriptor::Polygon(poly) => {
                let n = poly.len();
                match poly.vertex_on_ray(x) {
                    Some(k) => SubdifferentialSegment {
                        v_minus: poly.functionals()[(k + n - 1) % n],
                        v_plus: poly.functionals()[k],
                        degenerate: false,
                    },
                    None => SubdifferentialSegment::singleton(poly.functionals()[poly.active_edge(x).0]),
                }
            }
            NormDescriptor::LinearImage { map, inner } => {
                let inner_seg = match inner.subdifferential(map.apply_inverse(x)) {
                    Subdifferential::Segment(s) => s,
                    Subdifferential::Origin => unreachable!("A⁻¹x ≠ 0 for invertible A"),
                };
                let mut seg = inner_seg.mapped(|v| map.apply_inverse_transpose(v));
                if map.det() < 0.0 {
                    std::mem::swap(&mut seg.v_minus, &mut seg.v_plus);
                }
                seg
            }
        };
        Subdifferential::Segment(seg)
    }

    /// `∇‖·‖²(x) = 2‖x‖∇‖·‖(x)`; zero at the origin.
    pub fn grad_norm_sq(&self, x: Vec2, policy: RayPolicy) -> Result<Gradient, NormError> {
        let seg = match self.subdifferential(x) {
            Subdifferential::Origin => {
                return Ok(Gradient {
                    value: Vec2::ZERO,
                    on_ray: false,
                })
            }
            Subdifferential::Segment(s) => s,
        };
        let on_ray = !seg.degenerate;
        if on_ray && policy == RayPolicy::Error {
            return Err(NormError::OnRay(x));
        }
        Ok(Gradient {
            value: seg.midpoint() * (2.0 * self.eval(x)),
            on_ray,
        })
    }

    /// `V(z, y) = (‖z‖² + ‖y‖² − ‖z − y‖²) / 2`.
    pub fn polarization(&self, z: Vec2, y: Vec2) -> f64 {
        let a = self.eval(z);
        let b = self.eval(y);
        let c = self.eval(z - y);
        0.5 * (a * a + b * b - c * c)
    }

    /// `Δ(z, y) = ‖z − y‖² − ‖z‖² + ∇‖·‖²(z)·y`.
    pub fn taylor_remainder(&self, z: Vec2, y: Vec2, policy: RayPolicy) -> Result<f64, NormError> {
        let g = self.grad_norm_sq(z, policy)?.value;
        let a = self.eval(z - y);
        let b = self.eval(z);
        Ok(a * a - b * b + g.dot(y))
    }

    /// Angles in `[0, 2π)` of the rays where the norm fails to be
    /// differentiable, sorted.
    pub fn non_differentiability_rays(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match self {
            NormDescriptor::Euclidean => vec![],
            NormDescriptor::Lp(Exponent::Finite(p)) if p.0 > 1.0 => vec![],
            NormDescriptor::Lp(Exponent::Finite(_)) => vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2],
            NormDescriptor::Lp(Exponent::Infinity) => {
                vec![FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4]
            }
            NormDescriptor::Polygon(poly) => poly.vertices().iter().map(|v| v.angle()).collect(),
            NormDescriptor::LinearImage { map, inner } => inner
                .non_differentiability_rays()
                .into_iter()
                .map(|t| map.apply(Vec2::from_angle(t)).angle())
                .collect(),
        };
        out.sort_by(f64::total_cmp);
        out
    }

    /// Polyhedral unit ball, when there is one.
    pub fn as_polygon(&self) -> Option<PolygonNorm> {
        match self {
            NormDescriptor::Euclidean => None,
            NormDescriptor::Lp(Exponent::Finite(p)) if p.0 > 1.0 => None,
            NormDescriptor::Lp(Exponent::Finite(_)) => PolygonNorm::new(vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(-1.0, 0.0),
                Vec2::new(0.0, -1.0),
            ])
            .ok(),
            NormDescriptor::Lp(Exponent::Infinity) => PolygonNorm::new(vec![
                Vec2::new(1.0, 1.0),
                Vec2::new(-1.0, 1.0),
                Vec2::new(-1.0, -1.0),
                Vec2::new(1.0, -1.0),
            ])
            .ok(),
            NormDescriptor::Polygon(p) => Some(p.clone()),
            NormDescriptor::LinearImage { map, inner } => inner.as_polygon()?.transformed(map).ok(),
        }
    }

    /// Upper bound on `|x|` over the unit sphere, exact except for linear
    /// images of smooth norms.
    pub fn circumradius(&self) -> f64 {
        match self {
            NormDescriptor::Euclidean => 1.0,
            NormDescriptor::Lp(e) => {
                let p = e.as_f64();
                if p >= 2.0 {
                    2f64.powf(0.5 - 1.0 / p)
                } else {
                    1.0
                }
            }
            NormDescriptor::Polygon(p) => p.circumradius(),
            NormDescriptor::LinearImage { map, inner } => match self.as_polygon() {
                Some(p) => p.circumradius(),
                None => map.operator_norm() * inner.circumradius(),
            },
        }
    }

    /// Lower bound on `|x|` over the unit sphere.
    pub fn inradius(&self) -> f64 {
        match self {
            NormDescriptor::Euclidean => 1.0,
            NormDescriptor::Lp(e) => {
                let p = e.as_f64();
                if p >= 2.0 {
                    1.0
                } else {
                    2f64.powf(0.5 - 1.0 / p)
                }
            }
            NormDescriptor::Polygon(p) => p.inradius(),
            NormDescriptor::LinearImage { map, inner } => match self.as_polygon() {
                Some(p) => p.inradius(),
                None => inner.inradius() / map.inverse_operator_norm(),
            },
        }
    }

    /// Lebesgue area of the unit ball.
    pub fn unit_ball_area(&self) -> f64 {
        match self {
            NormDescriptor::Euclidean => PI,
            NormDescriptor::Lp(Exponent::Infinity) => 4.0,
            NormDescriptor::Lp(Exponent::Finite(p)) => {
                let p = p.0;
                let g = libm::tgamma(1.0 + 1.0 / p);
                4.0 * g * g / libm::tgamma(1.0 + 2.0 / p)
            }
            NormDescriptor::Polygon(p) => p.area(),
            NormDescriptor::LinearImage { map, inner } => map.det().abs() * inner.unit_ball_area(),
        }
    }
}

fn lp_eval(p: f64, x: Vec2) -> f64 {
    if p == 1.0 {
        return x.x.abs() + x.y.abs();
    }
    if p == 2.0 {
        return x.norm();
    }
    let m = x.max_abs();
    if m == 0.0 {
        return 0.0;
    }
    let a = (x.x.abs() / m).powf(p);
    let b = (x.y.abs() / m).powf(p);
    m * (a + b).powf(1.0 / p)
}

/// `∇‖·‖_p(x)` for `1 < p < ∞`, `x ≠ 0`.
fn lp_unit_gradient(p: f64, x: Vec2) -> Vec2 {
    let n = lp_eval(p, x);
    let c = |t: f64| t.signum() * (t.abs() / n).powf(p - 1.0);
    Vec2::new(c(x.x), c(x.y))
}

/// Serialized form of [`NormDescriptor`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean {},
    Lp { p: PValue },
    Polygon { vertices: Vec<[f64; 2]> },
    LinearImage { map: [[f64; 2]; 2], inner: Box<NormSpec> },
}

/// A JSON-friendly exponent: a number, or `"inf"` for `p = ∞`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Number(f64),
    Named(String),
}

impl TryFrom<NormSpec> for NormDescriptor {
    type Error = NormError;

    fn try_from(spec: NormSpec) -> Result<Self, Self::Error> {
        Ok(match spec {
            NormSpec::Euclidean {} => NormDescriptor::Euclidean,
            NormSpec::Lp { p } => {
                let p = match p {
                    PValue::Number(v) => v,
                    PValue::Named(s) => match s.to_ascii_lowercase().as_str() {
                        "inf" | "infinity" | "∞" => f64::INFINITY,
                        other => other.parse::<f64>().map_err(|_| {
                            NormError::InvalidDescriptor(format!("unrecognized exponent {s:?}"))
                        })?,
                    },
                };
                NormDescriptor::lp(p)?
            }
            NormSpec::Polygon { vertices } => NormDescriptor::Polygon(PolygonNorm::with_antipodal_closure(
                vertices.into_iter().map(Vec2::from).collect(),
            )?),
            NormSpec::LinearImage { map, inner } => NormDescriptor::LinearImage {
                map: LinearMap2::from_rows(map)?,
                inner: Box::new(NormDescriptor::try_from(*inner)?),
            },
        })
    }
}

impl From<NormDescriptor> for NormSpec {
    fn from(n: NormDescriptor) -> Self {
        match n {
            NormDescriptor::Euclidean => NormSpec::Euclidean {},
            NormDescriptor::Lp(Exponent::Infinity) => NormSpec::Lp {
                p: PValue::Named("inf".into()),
            },
            NormDescriptor::Lp(Exponent::Finite(p)) => NormSpec::Lp {
                p: PValue::Number(p.0),
            },
            NormDescriptor::Polygon(poly) => NormSpec::Polygon {
                vertices: poly.vertices().iter().map(|v| [v.x, v.y]).collect(),
            },
            NormDescriptor::LinearImage { map, inner } => NormSpec::LinearImage {
                map: map.rows(),
                inner: Box::new(NormSpec::from(*inner)),
            },
        }
    }
}

/// Euclidean angular distance from `theta` to the nearest ray, or `π` when
/// the norm is smooth.
pub fn distance_to_rays(rays: &[f64], theta: f64) -> f64 {
    rays.iter()
        .map(|&r| crate::vec2::angle_dist(r, theta))
        .fold(PI, f64::min)
}

/// Uniform angular grid `θ_k = 2π (k + ½) / n`.
pub fn angular_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| TAU * (k as f64 + 0.5) / n as f64)
}

#[cfg(test)]
mod tests;
