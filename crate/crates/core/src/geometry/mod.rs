//! Cones, boundary normals and directions of monotonicity.
//!
//! Normals and cone axes are normalized in the Euclidean metric; boundary
//! points are normalized in the norm under study.

mod constructions;

pub use constructions::{
    farthest_point, find_two_strict_directions, shear_for_weak_monotonicity, ShearResult,
    TwoStrictDirections, MIN_SEPARATION,
};

use crate::linalg::LinearMapError;
use crate::norms::{angular_grid, distance_to_rays, NormDescriptor, NormError, Subdifferential};
use crate::vec2::{angle_dist, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({}, {}) lies on a non-differentiability ray", .0.x, .0.y)]
    OnRay(Vec2),
    #[error("no regular boundary points with <x, nu> > eta were sampled")]
    DegenerateNorm,
    #[error("delta(sigma) <= 0 for every sigma in the grid")]
    NoPositiveDelta,
    #[error("monotonicity certificate failed for direction ({}, {}): {class:?}, min_dot = {min_dot:e}", .nu.x, .nu.y)]
    CertificateFailed {
        nu: Vec2,
        class: MonotonicityClass,
        min_dot: f64,
    },
    #[error("subgradient at the line's boundary point is parallel to the line's normal")]
    ShearDegenerate,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    LinearMap(#[from] LinearMapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    /// `X(x, span(axis), M)`.
    Bilateral { axis: Vec2 },
    /// `C(x, axis, M)`.
    Directional { axis: Vec2 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub apex: Vec2,
    pub kind: ConeKind,
    pub aperture: f64,
}

impl Cone {
    pub fn bilateral(apex: Vec2, axis: Vec2, aperture: f64) -> Self {
        Self {
            apex,
            kind: ConeKind::Bilateral {
                axis: axis.normalized(),
            },
            aperture,
        }
    }

    pub fn directional(apex: Vec2, axis: Vec2, aperture: f64) -> Self {
        Self {
            apex,
            kind: ConeKind::Directional {
                axis: axis.normalized(),
            },
            aperture,
        }
    }

    pub fn axis(&self) -> Vec2 {
        match self.kind {
            ConeKind::Bilateral { axis } | ConeKind::Directional { axis } => axis,
        }
    }

    /// `|π_{V⊥}(y − x)|` and `⟨axis, y − x⟩`.
    pub fn components(&self, y: Vec2) -> (f64, f64) {
        let d = y - self.apex;
        let a = self.axis();
        (a.cross(d).abs(), a.dot(d))
    }

    pub fn contains(&self, y: Vec2) -> bool {
        let (perp, along) = self.components(y);
        match self.kind {
            ConeKind::Bilateral { .. } => perp <= self.aperture * along.abs(),
            ConeKind::Directional { .. } => along >= 0.0 && perp <= self.aperture * along,
        }
    }

    /// Smallest aperture whose cone contains `y` (`∞` on the axis' normal line).
    pub fn required_aperture(&self, y: Vec2) -> f64 {
        let (perp, along) = self.components(y);
        if perp == 0.0 {
            0.0
        } else {
            perp / along.abs()
        }
    }
}

/// Outward Euclidean unit normal `∇‖x‖ / |∇‖x‖|` at a regular point.
pub fn boundary_normal(n: &NormDescriptor, x: Vec2) -> Result<Vec2, GeometryError> {
    if x == Vec2::ZERO {
        return Err(GeometryError::InvalidInput("boundary_normal at the origin".into()));
    }
    if n.is_on_ray(x) {
        return Err(GeometryError::OnRay(x));
    }
    match n.subdifferential(x) {
        Subdifferential::Segment(s) => Ok(s.midpoint().normalized()),
        Subdifferential::Origin => unreachable!(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityClass {
    Strict,
    Weak,
    None,
}

impl MonotonicityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MonotonicityClass::Strict => "strict",
            MonotonicityClass::Weak => "weak",
            MonotonicityClass::None => "none",
        }
    }

    pub fn at_least_weak(self) -> bool {
        self != MonotonicityClass::None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityParams {
    pub samples: usize,
    /// Exclusion band: only boundary points with `⟨x, ν⟩ > eta` count.
    pub eta: f64,
    /// Strictness threshold and weak tolerance.
    pub tau: f64,
    /// Angular distance (radians) below which a sample is treated as on a ray.
    pub ray_tol: f64,
}

impl Default for MonotonicityParams {
    fn default() -> Self {
        Self {
            samples: 4096,
            eta: 1e-3,
            tau: 1e-9,
            ray_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub nu: Vec2,
    pub class: MonotonicityClass,
    pub min_dot: f64,
    pub witness: Vec2,
}

impl MonotonicityReport {
    pub const CSV_HEADER: &'static str = "nu_x,nu_y,class,min_dot,witness_x,witness_y";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.nu.x,
            self.nu.y,
            self.class.as_str(),
            self.min_dot,
            self.witness.x,
            self.witness.y
        )
    }
}

pub fn write_monotonicity_csv<W: Write>(mut w: W, rows: &[MonotonicityReport]) -> std::io::Result<()> {
    writeln!(w, "{}", MonotonicityReport::CSV_HEADER)?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Infimum of `n(x)·ν` over regular boundary points with `⟨x, ν⟩ > η`.
///
/// Angular samples find the infimum for smooth norms; for polyhedral norms
/// every edge reaching into the half-plane is also evaluated exactly.
pub fn classify_monotonicity(
    n: &NormDescriptor,
    nu: Vec2,
    params: &MonotonicityParams,
) -> Result<MonotonicityReport, GeometryError> {
    if params.samples < 64 {
        return Err(GeometryError::InvalidInput(format!(
            "need at least 64 samples, got {}",
            params.samples
        )));
    }
    if nu == Vec2::ZERO || !nu.is_finite() {
        return Err(GeometryError::InvalidInput("direction must be nonzero".into()));
    }
    let nu = nu.normalized();
    let rays = n.non_differentiability_rays();
    let mut min_dot = f64::INFINITY;
    let mut witness = Vec2::ZERO;

    for theta in angular_grid(params.samples) {
        let x = n.boundary_point(Vec2::from_angle(theta));
        if x.dot(nu) <= params.eta || distance_to_rays(&rays, x.angle()) < params.ray_tol {
            continue;
        }
        let Subdifferential::Segment(s) = n.subdifferential(x) else {
            continue;
        };
        let d = s.midpoint().normalized().dot(nu);
        if d < min_dot {
            min_dot = d;
            witness = x;
        }
    }

    if let Some(poly) = n.as_polygon() {
        let vs = poly.vertices();
        let k = vs.len();
        for (i, a) in poly.functionals().iter().enumerate() {
            let (p, q) = (vs[i], vs[(i + 1) % k]);
            let (fp, fq) = (p.dot(nu), q.dot(nu));
            if fp <= params.eta && fq <= params.eta {
                continue;
            }
            let d = a.normalized().dot(nu);
            if d < min_dot {
                min_dot = d;
                witness = edge_witness(p, q, fp, fq, params.eta);
            }
        }
    }

    if !min_dot.is_finite() {
        return Err(GeometryError::DegenerateNorm);
    }
    let class = if min_dot > params.tau {
        MonotonicityClass::Strict
    } else if min_dot >= -params.tau {
        MonotonicityClass::Weak
    } else {
        MonotonicityClass::None
    };
    Ok(MonotonicityReport {
        nu,
        class,
        min_dot,
        witness,
    })
}

/// Midpoint of the part of edge `[p, q]` where `⟨x, ν⟩ > η`.
fn edge_witness(p: Vec2, q: Vec2, fp: f64, fq: f64, eta: f64) -> Vec2 {
    let (mut t0, mut t1) = (0.0, 1.0);
    if fp != fq {
        let t = (eta - fp) / (fq - fp);
        if fp <= eta {
            t0 = t.clamp(0.0, 1.0);
        } else if fq <= eta {
            t1 = t.clamp(0.0, 1.0);
        }
    }
    p.lerp(q, 0.5 * (t0 + t1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaDelta {
    pub sigma: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantitativeMonotonicity {
    /// `ν` rescaled onto the unit sphere of the norm.
    pub nu: Vec2,
    /// `δ(σ)` for ascending `σ`, made antitone by a running minimum.
    pub table: Vec<SigmaDelta>,
    pub sigma: f64,
    pub delta: f64,
}

/// Default `σ` grid for [`quantitative_monotonicity`].
pub const DEFAULT_SIGMA_GRID: [f64; 6] = [1.0 / 32.0, 1.0 / 16.0, 0.125, 0.25, 0.5, 1.0];

/// Samples per arc for norms without a polyhedral ball.
const ARC_SAMPLES: usize = 4096;

/// `δ(σ) = inf {⟨v, ν⟩ : x ∈ C(ν, σ) ∩ ∂B(0,1), v ∈ ∂‖x‖}`.
///
/// `C(ν, σ)` meets the sphere in the arc of angular half-width `atan σ`
/// around `ν`. Polygons are evaluated edge by edge; otherwise the arc is
/// sampled densely, endpoints included.
pub fn quantitative_monotonicity(
    n: &NormDescriptor,
    nu: Vec2,
    sigma_grid: &[f64],
) -> Result<QuantitativeMonotonicity, GeometryError> {
    if nu == Vec2::ZERO || !nu.is_finite() {
        return Err(GeometryError::InvalidInput("direction must be nonzero".into()));
    }
    if sigma_grid.is_empty() || sigma_grid.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(GeometryError::InvalidInput("sigma grid must be positive and finite".into()));
    }
    let nu_b = n.boundary_point(nu);
    let phi = nu_b.angle();
    let poly = n.as_polygon();
    let mut sigmas = sigma_grid.to_vec();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();

    let mut table = Vec::with_capacity(sigmas.len());
    let mut running = f64::INFINITY;
    for &sigma in &sigmas {
        let beta = sigma.atan();
        let raw = match &poly {
            Some(p) => {
                let vs = p.vertices();
                let k = vs.len();
                p.functionals()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| edge_meets_arc(vs[*i].angle(), vs[(i + 1) % k].angle(), phi, beta))
                    .map(|(_, a)| a.dot(nu_b))
                    .fold(f64::INFINITY, f64::min)
            }
            None => (0..=ARC_SAMPLES)
                .map(|j| {
                    let t = phi - beta + 2.0 * beta * j as f64 / ARC_SAMPLES as f64;
                    let x = n.boundary_point(Vec2::from_angle(t));
                    match n.subdifferential(x) {
                        Subdifferential::Segment(s) => s.v_minus.dot(nu_b).min(s.v_plus.dot(nu_b)),
                        Subdifferential::Origin => unreachable!(),
                    }
                })
                .fold(f64::INFINITY, f64::min),
        };
        running = running.min(raw);
        table.push(SigmaDelta {
            sigma,
            delta: running,
        });
    }
    let best = table
        .iter()
        .rev()
        .find(|sd| sd.delta > 0.0)
        .copied()
        .ok_or(GeometryError::NoPositiveDelta)?;
    Ok(QuantitativeMonotonicity {
        nu: nu_b,
        table,
        sigma: best.sigma,
        delta: best.delta,
    })
}

/// Whether the counterclockwise angular interval `[a, b]` (width `< π`)
/// meets the closed arc `[φ − β, φ + β]`.
fn edge_meets_arc(a: f64, b: f64, phi: f64, beta: f64) -> bool {
    let tau = std::f64::consts::TAU;
    let start = phi - beta;
    let width = (b - a).rem_euclid(tau);
    let s = (a - start).rem_euclid(tau);
    debug_assert!(beta < FRAC_PI_2);
    s <= 2.0 * beta || s + width >= tau || angle_dist(a, phi) <= beta
}

#[cfg(test)]
mod tests;
