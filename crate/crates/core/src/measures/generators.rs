//! Measure generators: Lebesgue patches, segments and self-similar sets.

use super::{MeasureError, PointMeasure, Provenance};
use crate::norms::NormDescriptor;
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Largest atom count any generator produces (`2^24`).
pub const MAX_ATOMS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new(Vec2::ZERO, Vec2::new(1.0, 1.0))
    }

    /// Square `[-h, h]²`.
    pub fn centered(h: f64) -> Self {
        Self::new(Vec2::new(-h, -h), Vec2::new(h, h))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// One uniform point per cell of an `nx × ny` grid with `nx·ny ≈ n`.
    #[default]
    Stratified,
    /// Independent uniform points, exactly `n` of them.
    Iid,
}

/// Weight convention of flat measures.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Normalization {
    /// Plain length or area.
    #[default]
    Raw,
    /// Rescaled so that `μ(B(x, r)) = r^m` for interior `x` in the given norm.
    Uniform { norm: NormDescriptor },
}

/// Lebesgue measure on `region`, optionally divided by the area of the
/// unit ball of a norm (the flat 2-uniform measure).
pub fn gen_lebesgue(
    region: Rect,
    n_samples: usize,
    seed: u64,
    sampling: Sampling,
    normalization: &Normalization,
) -> Result<PointMeasure, MeasureError> {
    let area = region.area();
    if !(region.width() > 0.0 && region.height() > 0.0 && area.is_finite()) {
        return Err(MeasureError::InvalidGenerator(format!("degenerate rectangle {region:?}")));
    }
    if n_samples == 0 {
        return Err(MeasureError::InvalidGenerator("need at least one sample".into()));
    }
    if n_samples > MAX_ATOMS {
        return Err(MeasureError::AtomBudget {
            requested: n_samples as u128,
            limit: MAX_ATOMS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec2> = match sampling {
        Sampling::Iid => (0..n_samples)
            .map(|_| {
                Vec2::new(
                    region.min.x + region.width() * rng.gen::<f64>(),
                    region.min.y + region.height() * rng.gen::<f64>(),
                )
            })
            .collect(),
        Sampling::Stratified => {
            let aspect = region.width() / region.height();
            let nx = ((n_samples as f64 * aspect).sqrt().round() as usize).max(1);
            let ny = ((n_samples as f64 / nx as f64).round() as usize).max(1);
            let (cx, cy) = (region.width() / nx as f64, region.height() / ny as f64);
            let mut pts = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    pts.push(Vec2::new(
                        region.min.x + cx * (i as f64 + rng.gen::<f64>()),
                        region.min.y + cy * (j as f64 + rng.gen::<f64>()),
                    ));
                }
            }
            pts
        }
    };
    let count = points.len();
    let scale = match normalization {
        Normalization::Raw => 1.0,
        Normalization::Uniform { norm } => 1.0 / norm.unit_ball_area(),
    };
    let w = area / count as f64 * scale;
    let prov = Provenance::new(
        "lebesgue",
        json!({
            "region": region, "samples": count, "sampling": sampling,
            "normalization": normalization,
        }),
        Some(seed),
        (area / count as f64).sqrt(),
    );
    PointMeasure::new(points, vec![w; count], prov)
}

/// Length measure on the segment `{t u : |t| ≤ L}` discretized at spacing
/// `h`. With `Uniform(n)` the weights carry the factor `‖u‖_n / 2`, which
/// makes `μ(B(x, r)) = r` for interior `x`.
pub fn gen_hausdorff1_segment(
    u: Vec2,
    half_length: f64,
    spacing: f64,
    normalization: &Normalization,
) -> Result<PointMeasure, MeasureError> {
    if !(u.is_finite() && u != Vec2::ZERO) {
        return Err(MeasureError::InvalidGenerator("direction must be nonzero".into()));
    }
    if !(half_length > 0.0 && spacing > 0.0 && spacing <= half_length / 10.0) {
        return Err(MeasureError::InvalidGenerator(format!(
            "need 0 < spacing <= half_length/10, got h = {spacing}, L = {half_length}"
        )));
    }
    let u = u.normalized();
    let k = (half_length / spacing * (1.0 + 1e-12)).floor() as i64;
    let count = (2 * k + 1) as usize;
    if count > MAX_ATOMS {
        return Err(MeasureError::AtomBudget {
            requested: count as u128,
            limit: MAX_ATOMS,
        });
    }
    let points = (-k..=k).map(|i| u * (i as f64 * spacing)).collect();
    let factor = match normalization {
        Normalization::Raw => 1.0,
        Normalization::Uniform { norm } => norm.eval(u) / 2.0,
    };
    let prov = Provenance::new(
        "segment",
        json!({
            "direction": u, "half_length": half_length, "spacing": spacing,
            "normalization": normalization,
        }),
        None,
        spacing,
    );
    PointMeasure::new(points, vec![spacing * factor; count], prov)
}

/// Length measure on the polyline through `vertices`, one atom per step of
/// at most `spacing` along each piece.
pub fn gen_polyline(vertices: &[Vec2], spacing: f64) -> Result<PointMeasure, MeasureError> {
    if vertices.len() < 2 || vertices.iter().any(|v| !v.is_finite()) {
        return Err(MeasureError::InvalidGenerator("a polyline needs at least two finite vertices".into()));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(MeasureError::InvalidGenerator(format!("spacing must be positive, got {spacing}")));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut last = 0.0;
    for w in vertices.windows(2) {
        let len = (w[1] - w[0]).norm();
        if len == 0.0 {
            return Err(MeasureError::InvalidGenerator("repeated polyline vertex".into()));
        }
        let k = (len / spacing).ceil() as usize;
        if points.len() + k + 1 > MAX_ATOMS {
            return Err(MeasureError::AtomBudget {
                requested: (points.len() + k + 1) as u128,
                limit: MAX_ATOMS,
            });
        }
        last = len / k as f64;
        for i in 0..k {
            points.push(w[0].lerp(w[1], i as f64 / k as f64));
            weights.push(last);
        }
    }
    points.push(vertices[vertices.len() - 1]);
    weights.push(last);
    let prov = Provenance::new(
        "polyline",
        json!({ "vertices": vertices, "spacing": spacing }),
        None,
        spacing,
    );
    PointMeasure::new(points, weights, prov)
}

/// `x ↦ scale·x + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityMap {
    pub scale: f64,
    pub translation: Vec2,
}

impl SimilarityMap {
    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        p * self.scale + self.translation
    }

    pub fn fixed_point(&self) -> Vec2 {
        self.translation / (1.0 - self.scale)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSpec {
    pub maps: Vec<SimilarityMap>,
    /// Equal weights when omitted.
    #[serde(default)]
    pub probabilities: Option<Vec<f64>>,
    pub depth: u32,
    /// Point whose images carry the atoms; defaults to the mean of the
    /// maps' fixed points.
    #[serde(default)]
    pub anchor: Option<Vec2>,
}

impl IfsSpec {
    pub fn probabilities(&self) -> Vec<f64> {
        self.probabilities
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.maps.len() as f64; self.maps.len()])
    }

    pub fn anchor(&self) -> Vec2 {
        self.anchor.unwrap_or_else(|| {
            let s = self.maps.iter().fold(Vec2::ZERO, |acc, m| acc + m.fixed_point());
            s / self.maps.len() as f64
        })
    }

    /// `log(#maps) / log(1/λ)` for equal scales and probabilities.
    pub fn similarity_dimension(&self) -> Option<f64> {
        let l = self.maps.first()?.scale;
        if self.maps.iter().any(|m| m.scale != l) {
            return None;
        }
        Some((self.maps.len() as f64).ln() / (1.0 / l).ln())
    }

    fn validate(&self) -> Result<(), MeasureError> {
        if self.maps.is_empty() {
            return Err(MeasureError::InvalidGenerator("IFS needs at least one map".into()));
        }
        if let Some(m) = self.maps.iter().find(|m| !(m.scale > 0.0 && m.scale < 1.0) || !m.translation.is_finite()) {
            return Err(MeasureError::InvalidGenerator(format!("map {m:?} is not a contraction")));
        }
        let p = self.probabilities();
        if p.len() != self.maps.len() || p.iter().any(|q| !(*q > 0.0)) {
            return Err(MeasureError::InvalidGenerator("probabilities must be positive, one per map".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MeasureError::InvalidGenerator(format!("probabilities sum to {total}")));
        }
        let requested = (self.maps.len() as u128).checked_pow(self.depth).unwrap_or(u128::MAX);
        if requested > MAX_ATOMS as u128 {
            return Err(MeasureError::AtomBudget {
                requested,
                limit: MAX_ATOMS,
            });
        }
        Ok(())
    }
}

/// One atom per depth-level cylinder `f_{i₁} ∘ … ∘ f_{i_k}(anchor)`, weighted
/// by the product of the probabilities.
pub fn gen_ifs(spec: &IfsSpec) -> Result<PointMeasure, MeasureError> {
    spec.validate()?;
    let probs = spec.probabilities();
    let mut points = vec![spec.anchor()];
    let mut weights = vec![1.0];
    for _ in 0..spec.depth {
        let mut np = Vec::with_capacity(points.len() * spec.maps.len());
        let mut nw = Vec::with_capacity(points.len() * spec.maps.len());
        for (m, q) in spec.maps.iter().zip(&probs) {
            for (p, w) in points.iter().zip(&weights) {
                np.push(m.apply(*p));
                nw.push(w * q);
            }
        }
        points = np;
        weights = nw;
    }
    let fixed: Vec<Vec2> = spec.maps.iter().map(|m| m.fixed_point()).collect();
    let (lo, hi) = super::bbox(&fixed);
    let lmax = spec.maps.iter().map(|m| m.scale).fold(0.0, f64::max);
    let diam = (hi - lo).norm().max(f64::MIN_POSITIVE);
    let prov = Provenance::new(
        "ifs",
        serde_json::to_value(spec).unwrap_or_default(),
        None,
        lmax.powi(spec.depth as i32) * diam,
    );
    PointMeasure::new(points, weights, prov)
}

/// Four maps `λx + c` with `c` at the corners of `[0, 1 − λ]²`.
pub fn four_corner(lambda: f64, depth: u32) -> IfsSpec {
    let t = 1.0 - lambda;
    let corners = [Vec2::ZERO, Vec2::new(t, 0.0), Vec2::new(0.0, t), Vec2::new(t, t)];
    IfsSpec {
        maps: corners
            .iter()
            .map(|&c| SimilarityMap {
                scale: lambda,
                translation: c,
            })
            .collect(),
        probabilities: None,
        depth,
        anchor: None,
    }
}

/// Middle-interval Cantor set on the first axis.
pub fn cantor(lambda: f64, depth: u32) -> IfsSpec {
    IfsSpec {
        maps: vec![
            SimilarityMap {
                scale: lambda,
                translation: Vec2::ZERO,
            },
            SimilarityMap {
                scale: lambda,
                translation: Vec2::new(1.0 - lambda, 0.0),
            },
        ],
        probabilities: None,
        depth,
        anchor: None,
    }
}

/// JSON description of a generator run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Lebesgue {
        region: Rect,
        samples: usize,
        #[serde(default)]
        sampling: Sampling,
        #[serde(default)]
        normalization: Normalization,
        #[serde(default)]
        seed: Option<u64>,
    },
    Segment {
        direction: Vec2,
        half_length: f64,
        spacing: f64,
        #[serde(default)]
        normalization: Normalization,
    },
    Polyline {
        vertices: Vec<Vec2>,
        spacing: f64,
    },
    Ifs(IfsSpec),
    FourCorner {
        lambda: f64,
        depth: u32,
    },
    Cantor {
        lambda: f64,
        depth: u32,
    },
    File {
        path: std::path::PathBuf,
    },
}

impl GeneratorSpec {
    /// Builds the measure; `default_seed` applies where the spec has none.
    pub fn generate(&self, default_seed: u64) -> Result<PointMeasure, MeasureError> {
        match self {
            GeneratorSpec::Lebesgue {
                region,
                samples,
                sampling,
                normalization,
                seed,
            } => gen_lebesgue(*region, *samples, seed.unwrap_or(default_seed), *sampling, normalization),
            GeneratorSpec::Segment {
                direction,
                half_length,
                spacing,
                normalization,
            } => gen_hausdorff1_segment(*direction, *half_length, *spacing, normalization),
            GeneratorSpec::Polyline { vertices, spacing } => gen_polyline(vertices, *spacing),
            GeneratorSpec::Ifs(spec) => gen_ifs(spec),
            GeneratorSpec::FourCorner { lambda, depth } => gen_ifs(&four_corner(*lambda, *depth)),
            GeneratorSpec::Cantor { lambda, depth } => gen_ifs(&cantor(*lambda, *depth)),
            GeneratorSpec::File { path } => {
                let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
                let f = std::io::BufReader::new(std::fs::File::open(path)?);
                if is_csv {
                    super::read_csv(f)
                } else {
                    super::read_pmsr(f)
                }
            }
        }
    }

    /// Similarity dimension for self-similar generators, the flat
    /// dimension otherwise.
    pub fn nominal_dimension(&self) -> Option<f64> {
        match self {
            GeneratorSpec::Lebesgue { .. } => Some(2.0),
            GeneratorSpec::Segment { .. } | GeneratorSpec::Polyline { .. } => Some(1.0),
            GeneratorSpec::Ifs(s) => s.similarity_dimension(),
            GeneratorSpec::FourCorner { lambda, depth } => four_corner(*lambda, *depth).similarity_dimension(),
            GeneratorSpec::Cantor { lambda, depth } => cantor(*lambda, *depth).similarity_dimension(),
            GeneratorSpec::File { .. } => None,
        }
    }
}
