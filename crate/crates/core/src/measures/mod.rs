//! Weighted point clouds standing in for planar Radon measures.
//!
//! Balls are closed: an atom at norm distance exactly `r` counts.

mod generators;
mod index;
mod io;

pub use generators::{
    cantor, four_corner, gen_hausdorff1_segment, gen_ifs, gen_lebesgue, gen_polyline, GeneratorSpec, IfsSpec,
    Normalization, Rect, Sampling, SimilarityMap, MAX_ATOMS,
};
pub use index::{bbox, GridIndex};
pub use io::{read_csv, read_pmsr, write_csv, write_pmsr, PMSR_MAGIC};

use crate::linalg::LinearMap2;
use crate::norms::NormDescriptor;
use crate::sum::{compensated_sum, NeumaierSum};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack on the Euclidean pre-filter radius.
const PREFILTER_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("points and weights differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("weight {0} is not a positive finite number")]
    BadWeight(usize),
    #[error("point {0} is not finite")]
    BadPoint(usize),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("atom budget exceeded: {requested} atoms requested, limit {limit}")]
    AtomBudget { requested: u128, limit: usize },
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error(transparent)]
    Norm(#[from] crate::norms::NormError),
    #[error(transparent)]
    LinearMap(#[from] crate::linalg::LinearMapError),
    #[error("malformed measure file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a measure came from. Stored with the measure and in files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Length scale below which the discretization dominates.
    pub resolution: f64,
    #[serde(default)]
    pub parent: Option<Box<Provenance>>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(generator: &str, params: serde_json::Value, seed: Option<u64>, resolution: f64) -> Self {
        Self {
            generator: generator.into(),
            params,
            seed,
            resolution,
            parent: None,
            notes: Vec::new(),
        }
    }

    fn derived(generator: &str, params: serde_json::Value, parent: &Provenance, resolution: f64) -> Self {
        Self {
            generator: generator.into(),
            params,
            seed: parent.seed,
            resolution,
            parent: Some(Box::new(parent.clone())),
            notes: Vec::new(),
        }
    }
}

/// Atoms with positive weights and a grid index over them.
#[derive(Clone, Debug)]
pub struct PointMeasure {
    points: Vec<Vec2>,
    weights: Vec<f64>,
    total_mass: f64,
    index: GridIndex,
    provenance: Provenance,
}

impl PartialEq for PointMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.weights == other.weights
    }
}

impl PointMeasure {
    pub fn new(points: Vec<Vec2>, weights: Vec<f64>, provenance: Provenance) -> Result<Self, MeasureError> {
        if points.len() != weights.len() {
            return Err(MeasureError::LengthMismatch(points.len(), weights.len()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(MeasureError::BadWeight(i));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(MeasureError::BadPoint(i));
        }
        Ok(Self::new_unchecked(points, weights, provenance))
    }

    fn new_unchecked(points: Vec<Vec2>, weights: Vec<f64>, mut provenance: Provenance) -> Self {
        let total_mass = compensated_sum(weights.iter().copied());
        let index = GridIndex::build(&points);
        if !(provenance.resolution > 0.0) {
            let (lo, hi) = bbox(&points);
            provenance.resolution = (hi - lo).norm() / (points.len().max(1) as f64).sqrt();
        }
        Self {
            points,
            weights,
            total_mass,
            index,
            provenance,
        }
    }

    /// Unit atoms at the given points, with a fallback resolution.
    pub fn from_points(points: Vec<Vec2>) -> Result<Self, MeasureError> {
        let w = vec![1.0; points.len()];
        Self::new(points, w, Provenance::new("points", serde_json::Value::Null, None, 0.0))
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.provenance.notes.push(note.into());
        self
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        bbox(&self.points)
    }

    pub fn diameter_bound(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    pub fn resolution(&self) -> f64 {
        self.provenance.resolution
    }

    /// Radii where discrete ball masses are trusted: at least ten times the
    /// resolution and at most a quarter of the bounding-box diagonal.
    pub fn trusted_window(&self) -> (f64, f64) {
        (10.0 * self.resolution(), self.diameter_bound() / 4.0)
    }

    /// Calls `f(index, norm distance)` for every atom in the closed ball,
    /// in unspecified order.
    pub fn for_each_in_ball(&self, n: &NormDescriptor, x: Vec2, r: f64, mut f: impl FnMut(usize, f64)) {
        let re = r * n.circumradius() * (1.0 + PREFILTER_SLACK);
        let re2 = re * re;
        let h = Vec2::new(re, re);
        self.index.for_each_candidate(x - h, x + h, |k| {
            let d = self.points[k] - x;
            if d.norm_sq() <= re2 {
                let nd = n.eval(d);
                if nd <= r {
                    f(k, nd);
                }
            }
        });
    }

    /// Atoms in the closed ball `B(x, r)` with their norm distances, by
    /// ascending index.
    pub fn ball_atoms(&self, n: &NormDescriptor, x: Vec2, r: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_in_ball(n, x, r, |k, d| out.push((k, d)));
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    /// `μ(B(x, r))`, summed in index order so the value does not depend on
    /// the grid layout.
    pub fn ball_mass(&self, n: &NormDescriptor, x: Vec2, r: f64) -> f64 {
        let atoms = self.ball_atoms(n, x, r);
        let mut s = NeumaierSum::new();
        for (k, _) in atoms {
            s.add(self.weights[k]);
        }
        s.value()
    }

    /// `μ(B(x, r))` for several radii from one gather. Values equal
    /// [`Self::ball_mass`] bit for bit.
    pub fn ball_mass_profile(&self, n: &NormDescriptor, x: Vec2, radii: &[f64]) -> Vec<f64> {
        let rmax = radii.iter().copied().fold(0.0, f64::max);
        if rmax <= 0.0 {
            return radii.iter().map(|_| 0.0).collect();
        }
        let atoms = self.ball_atoms(n, x, rmax);
        radii
            .iter()
            .map(|&r| {
                let mut s = NeumaierSum::new();
                for &(k, d) in &atoms {
                    if d <= r {
                        s.add(self.weights[k]);
                    }
                }
                s.value()
            })
            .collect()
    }

    /// Linear scan reference for [`Self::ball_mass`].
    pub fn ball_mass_brute_force(&self, n: &NormDescriptor, x: Vec2, r: f64) -> f64 {
        let mut s = NeumaierSum::new();
        for (p, w) in self.points.iter().zip(&self.weights) {
            if n.eval(*p - x) <= r {
                s.add(*w);
            }
        }
        s.value()
    }

    /// Euclidean distance from `x` to the nearest atom.
    pub fn nearest_distance(&self, x: Vec2) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        let (lo, hi) = self.bbox();
        let far = (x - lo).norm().max((x - hi).norm()) + self.index.cell_size();
        let mut h = self.index.cell_size();
        loop {
            let mut best = f64::INFINITY;
            self.index.for_each_candidate(x - Vec2::new(h, h), x + Vec2::new(h, h), |k| {
                best = best.min((self.points[k] - x).norm());
            });
            // any atom within h of x lies in the box just scanned
            if best <= h || h >= far {
                return best;
            }
            h *= 2.0;
        }
    }

    /// Image measure `A#μ`: atoms mapped by `A`, weights unchanged.
    pub fn push_forward(&self, a: &LinearMap2) -> PointMeasure {
        let points = self.points.iter().map(|p| a.apply(*p)).collect();
        let prov = Provenance::derived(
            "push_forward",
            serde_json::json!({ "map": a }),
            &self.provenance,
            self.resolution() * a.operator_norm(),
        );
        let mut m = Self::new_unchecked(points, self.weights.clone(), prov);
        m.total_mass = self.total_mass;
        m
    }

    /// `r^{-α} T_{x,r} μ` restricted to the window `B(0, R)`: atoms
    /// `(p − x)/r` for `‖p − x‖ ≤ rR`, weights times `r^{-α}`.
    ///
    /// A single finite rescaling; no convergence to a tangent measure is
    /// implied.
    pub fn blow_up(
        &self,
        n: &NormDescriptor,
        x: Vec2,
        r: f64,
        alpha: f64,
        window: f64,
    ) -> Result<PointMeasure, MeasureError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(MeasureError::BadRadius(r));
        }
        if !(window > 0.0 && window.is_finite()) {
            return Err(MeasureError::BadRadius(window));
        }
        let scale = r.powf(-alpha);
        let atoms = self.ball_atoms(n, x, r * window);
        let points = atoms.iter().map(|&(k, _)| (self.points[k] - x) / r).collect();
        let weights = atoms.iter().map(|&(k, _)| self.weights[k] * scale).collect();
        let mut prov = Provenance::derived(
            "blow_up",
            serde_json::json!({
                "center": x, "r": r, "alpha": alpha, "window": window, "norm": n,
            }),
            &self.provenance,
            self.resolution() / r,
        );
        prov.notes.push("finite rescaling; convergence to a tangent measure not certified".into());
        Ok(Self::new_unchecked(points, weights, prov))
    }

    /// `(−id)#μ`.
    pub fn reflected(&self) -> PointMeasure {
        let minus = LinearMap2::diag(-1.0, -1.0).expect("invertible");
        self.push_forward(&minus)
    }
}

#[cfg(test)]
mod tests;
