//! Density ratios `μ(B(x,r))/r^α`, exponent fits and uniformity diagnostics.
//!
//! Every radius handed to a report must lie in the measure's trusted window;
//! nothing here extrapolates past it.

use crate::geometry::Cone;
use crate::measures::{MeasureError, PointMeasure};
use crate::norms::NormDescriptor;
use crate::sum::NeumaierSum;
use crate::vec2::Vec2;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Fewest radii accepted by [`estimate_alpha`].
pub const MIN_FIT_RADII: usize = 8;
/// Smallest `log10(r_max / r_min)` accepted by [`estimate_alpha`].
pub const MIN_FIT_DECADES: f64 = 1.5;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("radii must be positive, finite and strictly increasing")]
    BadRadii,
    #[error("radius {r} lies outside the trusted window [{lo}, {hi}]")]
    OutsideWindow { r: f64, lo: f64, hi: f64 },
    #[error("{got} radii given, at least {need} required")]
    TooFewRadii { got: usize, need: usize },
    #[error("radii span {0:.3} decades, at least 1.5 required")]
    InsufficientSpan(f64),
    #[error("ball mass vanishes at radius {0}")]
    ZeroMass(f64),
    #[error("({}, {}) is {distance:e} from the nearest atom, beyond the spacing {spacing:e}", .x.x, .x.y)]
    OffSupport { x: Vec2, distance: f64, spacing: f64 },
    #[error("measure is not certified uniform at exponent {0}")]
    NotUniform(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_radii(radii: &[f64]) -> Result<(), DensityError> {
    if radii.is_empty()
        || !radii.iter().all(|r| r.is_finite() && *r > 0.0)
        || radii.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(DensityError::BadRadii);
    }
    Ok(())
}

fn check_window(mu: &PointMeasure, radii: &[f64]) -> Result<(f64, f64), DensityError> {
    let (lo, hi) = mu.trusted_window();
    for &r in radii {
        if r < lo || r > hi {
            return Err(DensityError::OutsideWindow { r, lo, hi });
        }
    }
    Ok((lo, hi))
}

/// `μ(B(x, r))/r^α` for each radius, without window checks.
pub fn density_ratios(mu: &PointMeasure, n: &NormDescriptor, x: Vec2, alpha: f64, radii: &[f64]) -> Vec<f64> {
    mu.ball_mass_profile(n, x, radii)
        .into_iter()
        .zip(radii)
        .map(|(m, r)| m / r.powf(alpha))
        .collect()
}

/// `max/min` of the values; `∞` when some but not all vanish.
pub fn oscillation(values: &[f64]) -> Option<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max == 0.0 {
        None
    } else if min == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(max / min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub center: Vec2,
    pub alpha: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `None` when every ratio is zero.
    pub oscillation: Option<f64>,
    pub window: (f64, f64),
    pub warning: Option<String>,
}

#[derive(Serialize)]
struct ProfileSummary<'a> {
    center: Vec2,
    alpha: f64,
    window: (f64, f64),
    oscillation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: &'a Option<String>,
}

impl DensityProfile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.radii.iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }

    /// `{center, alpha, window, oscillation}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(ProfileSummary {
            center: self.center,
            alpha: self.alpha,
            window: self.window,
            oscillation: self.oscillation,
            warning: &self.warning,
        })
        .expect("summary serializes")
    }
}

pub fn density_profile(
    mu: &PointMeasure,
    n: &NormDescriptor,
    x: Vec2,
    alpha: f64,
    radii: &[f64],
) -> Result<DensityProfile, DensityError> {
    check_radii(radii)?;
    let window = check_window(mu, radii)?;
    let values = density_ratios(mu, n, x, alpha, radii);
    let oscillation = oscillation(&values);
    let warning = oscillation
        .is_none()
        .then(|| "every ratio is zero; the center is probably off the support".to_string());
    Ok(DensityProfile {
        center: x,
        alpha,
        radii: radii.to_vec(),
        values,
        oscillation,
        window,
        warning,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares slope of `log μ(B(x, r))` against `log r`.
pub fn estimate_alpha(mu: &PointMeasure, n: &NormDescriptor, x: Vec2, radii: &[f64]) -> Result<AlphaFit, DensityError> {
    check_radii(radii)?;
    if radii.len() < MIN_FIT_RADII {
        return Err(DensityError::TooFewRadii {
            got: radii.len(),
            need: MIN_FIT_RADII,
        });
    }
    let span = (radii[radii.len() - 1] / radii[0]).log10();
    if span < MIN_FIT_DECADES {
        return Err(DensityError::InsufficientSpan(span));
    }
    let masses = mu.ball_mass_profile(n, x, radii);
    if let Some(i) = masses.iter().position(|m| *m <= 0.0) {
        return Err(DensityError::ZeroMass(radii[i]));
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    Ok(fit_line(&lx, &ly))
}

pub fn fit_line(x: &[f64], y: &[f64]) -> AlphaFit {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let alpha = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    AlphaFit {
        alpha,
        intercept: my - alpha * mx,
        r_squared,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub alpha: f64,
    pub centers: Vec<Vec2>,
    pub radii: Vec<f64>,
    pub median: f64,
    /// `max |ratio/median − 1|` over all (center, radius) pairs.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub window: (f64, f64),
}

/// Atoms whose bounding box stays inside the measure's own bounding box
/// after growing by the largest Euclidean extent of the balls; thin axes
/// are left unconstrained.
fn interior_atoms(mu: &PointMeasure, margin: f64) -> Vec<usize> {
    let (lo, hi) = mu.bbox();
    let inside = |v: f64, a: f64, b: f64| b - a <= 2.0 * margin || (v >= a + margin && v <= b - margin);
    (0..mu.len())
        .filter(|&k| {
            let p = mu.points()[k];
            inside(p.x, lo.x, hi.x) && inside(p.y, lo.y, hi.y)
        })
        .collect()
}

/// Samples centers by mass among atoms whose balls stay clear of the
/// truncation boundary and compares all ratios against their median.
pub fn uniformity_check(
    mu: &PointMeasure,
    n: &NormDescriptor,
    alpha: f64,
    centers: usize,
    radii: &[f64],
    tolerance: f64,
    seed: u64,
) -> Result<UniformityReport, DensityError> {
    check_radii(radii)?;
    let window = check_window(mu, radii)?;
    let margin = radii[radii.len() - 1] * n.circumradius();
    let pool = interior_atoms(mu, margin);
    let mut picked = Vec::with_capacity(centers);
    if !pool.is_empty() {
        let dist = WeightedIndex::new(pool.iter().map(|&k| mu.weights()[k]))
            .map_err(|e| DensityError::InvalidInput(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..centers {
            picked.push(mu.points()[pool[dist.sample(&mut rng)]]);
        }
    }
    let mut ratios: Vec<f64> = picked
        .iter()
        .flat_map(|&c| density_ratios(mu, n, c, alpha, radii))
        .collect();
    let (median, deviation) = if ratios.is_empty() {
        (f64::NAN, f64::INFINITY)
    } else {
        ratios.sort_by(f64::total_cmp);
        let k = ratios.len();
        let median = if k % 2 == 1 {
            ratios[k / 2]
        } else {
            (ratios[k / 2 - 1] + ratios[k / 2]) / 2.0
        };
        let dev = if median > 0.0 {
            ratios.iter().map(|v| (v / median - 1.0).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        (median, dev)
    };
    Ok(UniformityReport {
        alpha,
        centers: picked,
        radii: radii.to_vec(),
        median,
        deviation,
        tolerance,
        pass: deviation <= tolerance,
        window,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnuliReport {
    pub center: Vec2,
    pub n: usize,
    pub alpha: f64,
    pub occupied: Vec<bool>,
    pub witnesses: Vec<Option<Vec2>>,
    /// Balls `B(x_i, 1/(2N))` pairwise disjoint, checked by distance.
    pub disjoint: bool,
    /// Balls `B(x_i, 1/(2N))` inside `B(x₀, 2)`.
    pub contained: bool,
    /// `N·(2N)^(−α)`.
    pub lhs: f64,
    /// `2^α`.
    pub rhs: f64,
    pub inequality_holds: bool,
    /// `Σ μ(B(x_i, 1/(2N)))` over the witnesses.
    pub packed_mass: f64,
    /// `μ(B(x₀, 2))`.
    pub outer_mass: f64,
}

/// Picks one atom in each annulus `(2i−1)/(2N) < ‖z − x₀‖ ≤ i/N` and
/// checks the packing of the balls `B(x_i, 1/(2N))`.
///
/// Witnesses are chosen greedily, maximizing the distance to the ones
/// already picked; disjointness is then verified pairwise.
pub fn annuli_packing_check(
    mu: &PointMeasure,
    n: &NormDescriptor,
    x0: Vec2,
    count: usize,
    alpha: f64,
) -> Result<AnnuliReport, DensityError> {
    if count < 2 {
        return Err(DensityError::InvalidInput("N must be at least 2".into()));
    }
    let spacing = mu.resolution();
    let distance = mu.nearest_distance(x0);
    if !(distance <= spacing) {
        return Err(DensityError::OffSupport { x: x0, distance, spacing });
    }
    let nn = count as f64;
    let atoms = mu.ball_atoms(n, x0, 1.0);
    let mut witnesses: Vec<Option<Vec2>> = Vec::with_capacity(count);
    let mut chosen: Vec<Vec2> = Vec::new();
    for i in 1..=count {
        let inner = (2 * i - 1) as f64 / (2.0 * nn);
        let outer = i as f64 / nn;
        let mut best: Option<(f64, Vec2)> = None;
        for &(k, d) in &atoms {
            if d > inner && d <= outer {
                let p = mu.points()[k];
                let score = chosen.iter().map(|q| n.eval(p - *q)).fold(f64::INFINITY, f64::min);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, p));
                }
            }
        }
        let w = best.map(|(_, p)| p);
        if let Some(p) = w {
            chosen.push(p);
        }
        witnesses.push(w);
    }
    let rho = 1.0 / (2.0 * nn);
    let mut disjoint = true;
    for a in 0..chosen.len() {
        for b in a + 1..chosen.len() {
            if n.eval(chosen[a] - chosen[b]) <= 2.0 * rho {
                disjoint = false;
            }
        }
    }
    let contained = chosen.iter().all(|p| n.eval(*p - x0) + rho <= 2.0);
    let mut packed = NeumaierSum::new();
    for p in &chosen {
        packed.add(mu.ball_mass(n, *p, rho));
    }
    let lhs = nn * (2.0 * nn).powf(-alpha);
    let rhs = 2f64.powf(alpha);
    Ok(AnnuliReport {
        center: x0,
        n: count,
        alpha,
        occupied: witnesses.iter().map(Option::is_some).collect(),
        witnesses,
        disjoint,
        contained,
        lhs,
        rhs,
        inequality_holds: lhs <= rhs,
        packed_mass: packed.value(),
        outer_mass: mu.ball_mass(n, x0, 2.0),
    })
}

/// Radial test functions with known breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    /// `1[0, radius]`.
    Indicator { radius: f64 },
    /// `(1 − r/radius)₊`.
    Hat { radius: f64 },
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Indicator { radius } => {
                if r <= radius {
                    1.0
                } else {
                    0.0
                }
            }
            RadialProfile::Hat { radius } => (1.0 - r / radius).max(0.0),
        }
    }

    pub fn support(&self) -> f64 {
        match *self {
            RadialProfile::Indicator { radius } | RadialProfile::Hat { radius } => radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub quadrature_error: f64,
}

/// `∫_a^b f`, split at the given interior breakpoints.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> (f64, f64) {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|t| *t > a && *t < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.insert(0, a);
    cuts.push(b);
    let mut value = NeumaierSum::new();
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let out = quadrature::double_exponential::integrate(&f, w[0], w[1], tol);
        value.add(out.integral);
        err += out.error_estimate;
    }
    (value.value(), err)
}

/// Compares `Σ wᵢ g(‖zᵢ − x‖)` with `m ∫₀^R r^{m−1} g(r) dr`.
///
/// Refused unless `certificate` is a passing uniformity report at
/// exponent `m`.
pub fn radial_integral_check(
    mu: &PointMeasure,
    n: &NormDescriptor,
    x: Vec2,
    m: f64,
    g: impl Fn(f64) -> f64,
    r_max: f64,
    breakpoints: &[f64],
    certificate: &UniformityReport,
) -> Result<RadialReport, DensityError> {
    if !(certificate.pass && certificate.alpha == m) {
        return Err(DensityError::NotUniform(m));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(DensityError::InvalidInput(format!("R_max must be positive, got {r_max}")));
    }
    let mut lhs = NeumaierSum::new();
    for (k, d) in mu.ball_atoms(n, x, r_max) {
        lhs.add(mu.weights()[k] * g(d));
    }
    let (rhs, quadrature_error) = integrate(|r| m * r.powf(m - 1.0) * g(r), 0.0, r_max, breakpoints, 1e-12);
    let lhs = lhs.value();
    Ok(RadialReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        quadrature_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub holds: bool,
    /// Atom needing the widest aperture, with that aperture.
    pub worst: Option<(Vec2, f64)>,
}

/// Whether every atom in `B(z₀, r)` lies in the bilateral cone
/// `X(z₀, span V, M)`.
pub fn strong_cone_check(
    mu: &PointMeasure,
    n: &NormDescriptor,
    z0: Vec2,
    axis: Vec2,
    aperture: f64,
    r: f64,
) -> ConeCheck {
    let cone = Cone::bilateral(z0, axis, aperture);
    let mut worst: Option<(usize, f64)> = None;
    let mut holds = true;
    for (k, _) in mu.ball_atoms(n, z0, r) {
        let p = mu.points()[k];
        if !cone.contains(p) {
            holds = false;
        }
        let need = cone.required_aperture(p);
        if worst.is_none_or(|(_, s)| need > s) {
            worst = Some((k, need));
        }
    }
    ConeCheck {
        holds,
        worst: worst.map(|(k, s)| (mu.points()[k], s)),
    }
}
