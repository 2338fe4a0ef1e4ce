//! Touching parallelograms around point clouds and the graph scan built on
//! vertex-only contact.

use crate::linalg::{LinearMap2, LinearMapError};
use crate::measures::PointMeasure;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Smallest `|sin θ|` between the side normals.
pub const MIN_SIN: f64 = 1e-6;
/// Default relative band for active constraints and touch sets.
pub const DEFAULT_TAU: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TouchError {
    #[error("side normals are dependent (|sin θ| = {0:e})")]
    Degenerate(f64),
    #[error("invalid parallelogram: {0}")]
    Invalid(String),
    #[error("the point set is empty; the touching radius would be infinite")]
    Empty,
    #[error("center ({}, {}) lies on the set", .0.x, .0.y)]
    OnSet(Vec2),
    #[error("seed report has no vertex-only touch")]
    SeedNotVertexOnly,
    #[error("invalid scan range: {0}")]
    BadRange(String),
    #[error(transparent)]
    LinearMap(#[from] LinearMapError),
}

/// `P = {y : |⟨y,v⟩| ≤ h_v, |⟨y,w⟩| ≤ h_w}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelogramSpec {
    pub v: Vec2,
    pub w: Vec2,
    pub h_v: f64,
    pub h_w: f64,
}

impl ParallelogramSpec {
    pub fn new(v: Vec2, w: Vec2, h_v: f64, h_w: f64) -> Result<Self, TouchError> {
        if !(v.is_finite() && w.is_finite() && v != Vec2::ZERO && w != Vec2::ZERO) {
            return Err(TouchError::Invalid("side normals must be finite and nonzero".into()));
        }
        if !(h_v > 0.0 && h_w > 0.0 && h_v.is_finite() && h_w.is_finite()) {
            return Err(TouchError::Invalid("half-widths must be positive".into()));
        }
        let (v, w) = (v.normalized(), w.normalized());
        let s = v.cross(w).abs();
        if s < MIN_SIN {
            return Err(TouchError::Degenerate(s));
        }
        Ok(Self { v, w, h_v, h_w })
    }

    /// Every side of Euclidean length one: `h_v = h_w = |sin θ|/2`.
    pub fn unit_sides(v: Vec2, w: Vec2) -> Result<Self, TouchError> {
        if v == Vec2::ZERO || w == Vec2::ZERO {
            return Err(TouchError::Invalid("side normals must be nonzero".into()));
        }
        let s = v.normalized().cross(w.normalized()).abs();
        if s < MIN_SIN {
            return Err(TouchError::Degenerate(s));
        }
        Self::new(v, w, s / 2.0, s / 2.0)
    }

    /// `(|⟨y,v⟩|/h_v, |⟨y,w⟩|/h_w)`.
    pub fn constraints(&self, y: Vec2) -> (f64, f64) {
        (y.dot(self.v).abs() / self.h_v, y.dot(self.w).abs() / self.h_w)
    }

    pub fn gauge(&self, y: Vec2) -> f64 {
        let (a, b) = self.constraints(y);
        a.max(b)
    }

    /// Corners of `P`, counterclockwise.
    pub fn vertices(&self) -> [Vec2; 4] {
        // y with ⟨y,v⟩ = a h_v, ⟨y,w⟩ = b h_w
        let det = self.v.cross(self.w);
        let solve = |a: f64, b: f64| {
            let p = a * self.h_v;
            let q = b * self.h_w;
            Vec2::new((p * self.w.y - q * self.v.y) / det, (q * self.v.x - p * self.w.x) / det)
        };
        let mut vs = [solve(1.0, 1.0), solve(-1.0, 1.0), solve(-1.0, -1.0), solve(1.0, -1.0)];
        if (vs[1] - vs[0]).cross(vs[2] - vs[1]) < 0.0 {
            vs.reverse();
        }
        vs
    }

    /// Largest Euclidean norm on `P`.
    pub fn circumradius(&self) -> f64 {
        self.vertices().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Image of `P` under `A` (still a parallelogram, `A(P) = {G(A⁻¹u) ≤ 1}`).
    pub fn transformed(&self, a: &LinearMap2) -> Result<Self, TouchError> {
        let v = a.apply_inverse_transpose(self.v);
        let w = a.apply_inverse_transpose(self.w);
        Self::new(v, w, self.h_v / v.norm(), self.h_w / w.norm())
    }
}

/// `min_e G_P(e − x)` by brute force.
pub fn touching_radius_brute_force(p: &ParallelogramSpec, x: Vec2, e: &[Vec2]) -> Result<f64, TouchError> {
    if e.is_empty() {
        return Err(TouchError::Empty);
    }
    let d = e.iter().map(|q| p.gauge(*q - x)).fold(f64::INFINITY, f64::min);
    if d == 0.0 {
        return Err(TouchError::OnSet(x));
    }
    Ok(d)
}

fn min_gauge(p: &ParallelogramSpec, x: Vec2, e: &PointMeasure) -> f64 {
    let idx = e.index();
    let cr = p.circumradius();
    let (lo, hi) = e.bbox();
    let far = (x - lo).norm().max((x - hi).norm()) + idx.cell_size();
    let mut h = idx.cell_size();
    loop {
        let mut best = f64::INFINITY;
        idx.for_each_candidate(x - Vec2::new(h, h), x + Vec2::new(h, h), |k| {
            best = best.min(p.gauge(e.points()[k] - x));
        });
        // G(y) ≤ best implies |y| ≤ best·cr, so every better atom was scanned
        if best * cr <= h || h >= far {
            return best;
        }
        h *= 2.0;
    }
}

/// `d_P(x, E) = min_e G_P(e − x)`: with closed parallelograms this is the
/// supremum of radii whose translate misses `E`.
pub fn touching_radius(p: &ParallelogramSpec, x: Vec2, e: &PointMeasure) -> Result<f64, TouchError> {
    if e.is_empty() {
        return Err(TouchError::Empty);
    }
    let d = min_gauge(p, x, e);
    if d == 0.0 {
        return Err(TouchError::OnSet(x));
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Side orthogonal to `v`.
    V,
    /// Side orthogonal to `w`.
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", content = "side", rename_all = "snake_case")]
pub enum TouchClass {
    Vertex,
    Edge(Side),
}

impl TouchClass {
    pub fn label(self) -> &'static str {
        match self {
            TouchClass::Vertex => "vertex",
            TouchClass::Edge(Side::V) => "edge_v",
            TouchClass::Edge(Side::W) => "edge_w",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Touch {
    pub index: usize,
    pub point: Vec2,
    pub class: TouchClass,
    /// `|⟨e−x,v⟩|/h_v` and `|⟨e−x,w⟩|/h_w`.
    pub constraints: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchReport {
    pub center: Vec2,
    pub d: f64,
    pub tau: f64,
    pub touches: Vec<Touch>,
}

impl TouchReport {
    pub fn vertex_count(&self) -> usize {
        self.touches.iter().filter(|t| t.class == TouchClass::Vertex).count()
    }

    pub fn edge_count(&self) -> usize {
        self.touches.len() - self.vertex_count()
    }

    pub fn vertex_only(&self) -> bool {
        !self.touches.is_empty() && self.edge_count() == 0
    }
}

fn classify(constraints: (f64, f64), d: f64, tau: f64) -> TouchClass {
    let (a, b) = constraints;
    let floor = (1.0 - tau) * d;
    if a >= floor && b >= floor {
        TouchClass::Vertex
    } else if a >= b {
        TouchClass::Edge(Side::V)
    } else {
        TouchClass::Edge(Side::W)
    }
}

/// Atoms with `G_P(e − x) ≤ d(1 + τ)`, each labelled vertex (both
/// constraints within `τ` of `d`) or edge (the larger constraint's side).
pub fn classify_touches(
    p: &ParallelogramSpec,
    x: Vec2,
    e: &PointMeasure,
    tau: f64,
) -> Result<TouchReport, TouchError> {
    let d = touching_radius(p, x, e)?;
    let reach = d * (1.0 + tau);
    let h = reach * p.circumradius() * (1.0 + 1e-9);
    let mut found: Vec<usize> = Vec::new();
    e.index().for_each_candidate(x - Vec2::new(h, h), x + Vec2::new(h, h), |k| {
        if p.gauge(e.points()[k] - x) <= reach {
            found.push(k);
        }
    });
    found.sort_unstable();
    let touches = found
        .into_iter()
        .map(|k| {
            let point = e.points()[k];
            let constraints = p.constraints(point - x);
            Touch {
                index: k,
                point,
                class: classify(constraints, d, tau),
                constraints,
            }
        })
        .collect();
    Ok(TouchReport {
        center: x,
        d,
        tau,
        touches,
    })
}

/// Affine chart `u = A(y − origin)` in which the parallelogram becomes a
/// multiple of the square `|u₁| + |u₂| ≤ 1`, the seed center sits at
/// `(0, ½)` and its touch point at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanFrame {
    pub map: LinearMap2,
    pub origin: Vec2,
    /// Sidelength of the unit square `|u₁| + |u₂| ≤ 1` in this chart.
    pub sidelength: f64,
}

impl ScanFrame {
    pub fn to_frame(&self, y: Vec2) -> Vec2 {
        self.map.apply(y - self.origin)
    }

    pub fn from_frame(&self, u: Vec2) -> Vec2 {
        self.map.apply_inverse(u) + self.origin
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub t: f64,
    /// Height of the bottom vertex, `½ − d`.
    pub f_t: f64,
    pub class: TouchClass,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphScan {
    pub frame: ScanFrame,
    pub samples: Vec<ScanSample>,
    /// `max |f(t) − f(s)|/|t − s|` over consecutive samples.
    pub lipschitz: f64,
    /// Atoms strictly above the graph (by more than the step) in the band
    /// below the centers.
    pub violations: usize,
    /// First `t` whose touch was not at the bottom vertex alone.
    pub aborted_at: Option<f64>,
    pub abort_reason: Option<String>,
}

#[derive(Serialize)]
struct ScanHeader<'a> {
    frame: &'a ScanFrame,
    lipschitz: f64,
    violations: usize,
    aborted_at: Option<f64>,
    abort_reason: &'a Option<String>,
}

impl GraphScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,f_t,class,d")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{}", s.t, s.f_t, s.class.label(), s.d)?;
        }
        Ok(())
    }

    /// Frame, Lipschitz estimate and abort data.
    pub fn header_json(&self) -> serde_json::Value {
        serde_json::to_value(ScanHeader {
            frame: &self.frame,
            lipschitz: self.lipschitz,
            violations: self.violations,
            aborted_at: self.aborted_at,
            abort_reason: &self.abort_reason,
        })
        .expect("header serializes")
    }
}

/// Chart sending `P` to a multiple of the square `|u₁| + |u₂| ≤ 1`, the
/// seed's vertex touch to the origin and its center to `(0, ½)`.
pub fn scan_frame(p: &ParallelogramSpec, seed: &TouchReport) -> Result<ScanFrame, TouchError> {
    if !seed.vertex_only() {
        return Err(TouchError::SeedNotVertexOnly);
    }
    let e0 = seed.touches[0].point;
    let rel = e0 - seed.center;
    let sv = rel.dot(p.v).signum();
    let sw = rel.dot(p.w).signum();
    // a = −sv⟨y,v⟩/h_v, b = sw⟨y,w⟩/h_w; u = ((a + b)/2, (a − b)/2) puts the
    // touched corner (a, b) = (−1, 1)·d at the bottom
    let a = Vec2::new(-sv * p.v.x / p.h_v, -sv * p.v.y / p.h_v);
    let b = Vec2::new(sw * p.w.x / p.h_w, sw * p.w.y / p.h_w);
    let k = 1.0 / (2.0 * seed.d);
    let map = LinearMap2::new(
        k * (a.x + b.x) / 2.0,
        k * (a.y + b.y) / 2.0,
        k * (a.x - b.x) / 2.0,
        k * (a.y - b.y) / 2.0,
    )?;
    Ok(ScanFrame {
        map,
        origin: e0,
        sidelength: std::f64::consts::SQRT_2,
    })
}

/// For `t` over the grid, touches the set from `(t, ½)` with the square
/// `|u₁| + |u₂| ≤ d` and records the bottom vertex `(t, ½ − d)`. Stops at
/// the first `t` whose touch set is not the bottom vertex alone.
pub fn lipschitz_graph_scan(
    p: &ParallelogramSpec,
    e: &PointMeasure,
    seed: &TouchReport,
    t_range: (f64, f64),
    step: f64,
    tau: f64,
) -> Result<GraphScan, TouchError> {
    let (t0, t1) = t_range;
    if !(t0.is_finite() && t1.is_finite() && t0 <= t1 && step > 0.0 && step.is_finite()) {
        return Err(TouchError::BadRange(format!("[{t0}, {t1}] with step {step}")));
    }
    let frame = scan_frame(p, seed)?;
    let pts: Vec<Vec2> = e.points().iter().map(|q| frame.to_frame(*q)).collect();
    let local = PointMeasure::new(pts, e.weights().to_vec(), e.provenance().clone())
        .map_err(|err| TouchError::Invalid(err.to_string()))?;
    let square = ParallelogramSpec::new(Vec2::new(1.0, 1.0), Vec2::new(1.0, -1.0), 0.5f64.sqrt(), 0.5f64.sqrt())?;
    let count = ((t1 - t0) / step * (1.0 + 1e-12)).floor() as usize + 1;
    let mut samples = Vec::with_capacity(count);
    let mut aborted_at = None;
    let mut abort_reason = None;
    for i in 0..count {
        let t = t0 + i as f64 * step;
        let c = Vec2::new(t, 0.5);
        let rep = classify_touches(&square, c, &local, tau)?;
        let bottom = rep.touches.iter().all(|tc| {
            let rel = tc.point - c;
            tc.class == TouchClass::Vertex && rel.y < 0.0 && rel.x.abs() <= 2.0 * tau * rep.d + 1e-12
        });
        if !bottom {
            let kinds: Vec<&str> = rep.touches.iter().map(|tc| tc.class.label()).collect();
            aborted_at = Some(t);
            abort_reason = Some(format!("touch set at t = {t} is not the bottom vertex alone: {kinds:?}"));
            break;
        }
        samples.push(ScanSample {
            t,
            f_t: 0.5 - rep.d,
            class: TouchClass::Vertex,
            d: rep.d,
        });
    }
    let lipschitz = samples
        .windows(2)
        .map(|w| (w[1].f_t - w[0].f_t).abs() / (w[1].t - w[0].t))
        .fold(0.0, f64::max);
    let violations = count_violations(&local, &samples, step);
    Ok(GraphScan {
        frame,
        samples,
        lipschitz,
        violations,
        aborted_at,
        abort_reason,
    })
}

fn count_violations(local: &PointMeasure, samples: &[ScanSample], band: f64) -> usize {
    if samples.len() < 2 {
        return 0;
    }
    let (ta, tb) = (samples[0].t, samples[samples.len() - 1].t);
    let lo = Vec2::new(ta, samples.iter().map(|s| s.f_t).fold(f64::INFINITY, f64::min));
    let hi = Vec2::new(tb, 0.5);
    let step = samples[1].t - samples[0].t;
    local
        .index()
        .query_box(local.points(), lo, hi)
        .into_iter()
        .filter(|&k| {
            let u = local.points()[k];
            let j = (((u.x - ta) / step).floor() as usize).min(samples.len() - 2);
            let s = (u.x - samples[j].t) / step;
            let f = samples[j].f_t + s * (samples[j + 1].f_t - samples[j].f_t);
            u.y > f + band && u.y < 0.5
        })
        .count()
}
