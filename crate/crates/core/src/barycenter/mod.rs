//! Polarization averages `b_μ(r; y)` and nonlinear barycenters `b_μ(r)`.
//!
//! Balls are centered at the origin, which is assumed to be a support point.
//! All sums are compensated: the quantities of interest are cancellations.

use crate::density::UniformityReport;
use crate::measures::PointMeasure;
use crate::norms::{NormDescriptor, RayPolicy};
use crate::sum::{NeumaierSum, VecSum};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Largest share of atoms on non-differentiability rays accepted by
/// [`nonlinear_barycenter`].
pub const MAX_RAY_FRACTION: f64 = 1e-3;
/// Relative slack on the trivial bound.
pub const TRIVIAL_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BarycenterError {
    #[error("{fraction:e} of the atoms in the ball lie on non-differentiability rays (limit 1e-3)")]
    RayFraction { fraction: f64 },
    #[error("measure is not certified uniform at exponent {0}")]
    NotUniform(f64),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
}

fn check_radius(r: f64) -> Result<(), BarycenterError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(BarycenterError::BadRadius(r))
    }
}

/// `r^(−α) Σ_{‖zᵢ‖ ≤ r} wᵢ V(zᵢ, y)`.
pub fn polarization_average(mu: &PointMeasure, n: &NormDescriptor, r: f64, y: Vec2, alpha: f64) -> f64 {
    let mut s = NeumaierSum::new();
    for (k, _) in mu.ball_atoms(n, Vec2::ZERO, r) {
        s.add(mu.weights()[k] * n.polarization(mu.points()[k], y));
    }
    s.value() / r.powf(alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barycenter {
    pub value: Vec2,
    /// Share of the atoms in the ball lying on a ray.
    pub ray_fraction: f64,
    /// `r^(−α) Σ wᵢ |∇‖·‖²(zᵢ)|`, the size the value cancels down from.
    pub mass_scale: f64,
}

/// `r^(−α) Σ_{‖zᵢ‖ ≤ r} wᵢ ∇‖·‖²(zᵢ)`, using the subdifferential
/// midpoint on rays.
pub fn nonlinear_barycenter(
    mu: &PointMeasure,
    n: &NormDescriptor,
    r: f64,
    alpha: f64,
) -> Result<Barycenter, BarycenterError> {
    check_radius(r)?;
    let atoms = mu.ball_atoms(n, Vec2::ZERO, r);
    let mut sum = VecSum::new();
    let mut scale = NeumaierSum::new();
    let mut on_ray = 0usize;
    for &(k, _) in &atoms {
        let g = n
            .grad_norm_sq(mu.points()[k], RayPolicy::Midpoint)
            .expect("midpoint policy never fails");
        if g.on_ray {
            on_ray += 1;
        }
        let w = mu.weights()[k];
        sum.add(g.value * w);
        scale.add(g.value.norm() * w);
    }
    let fraction = if atoms.is_empty() {
        0.0
    } else {
        on_ray as f64 / atoms.len() as f64
    };
    if fraction > MAX_RAY_FRACTION {
        return Err(BarycenterError::RayFraction { fraction });
    }
    let f = r.powf(-alpha);
    Ok(Barycenter {
        value: sum.value() * f,
        ray_fraction: fraction,
        mass_scale: scale.value() * f,
    })
}

/// `max(2, (1 + 4α)/2)`.
pub fn decay_ceiling(alpha: f64) -> f64 {
    f64::max(2.0, (1.0 + 4.0 * alpha) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub y: Vec2,
    pub norm_y: f64,
    pub abs_b: f64,
    /// `|b(r; y)| / ‖y‖²`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayScan {
    pub r: f64,
    pub alpha: f64,
    pub rows: Vec<DecayRow>,
    /// Largest ratio over `‖y‖ ≤ r/2`; zero when no such `y` was given.
    pub c_hat: f64,
    /// `max(|b(r; y)| − r‖y‖)`.
    pub trivial_margin: f64,
    /// `max(|b| − (μ(B(0,r))/r^α)·r‖y‖·(1 + 1e−9))`, nonpositive when the
    /// weighted trivial bound holds.
    pub weighted_margin: f64,
    pub ceiling: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct DecaySummary {
    r: f64,
    alpha: f64,
    #[serde(rename = "C_hat")]
    c_hat: f64,
    trivial_margin: f64,
    ceiling: f64,
    pass: bool,
}

impl DecayScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "y_x,y_y,norm_y,abs_b,ratio")?;
        for row in &self.rows {
            writeln!(w, "{},{},{},{},{}", row.y.x, row.y.y, row.norm_y, row.abs_b, row.ratio)?;
        }
        Ok(())
    }

    /// `{r, alpha, C_hat, trivial_margin, ceiling, pass}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(DecaySummary {
            r: self.r,
            alpha: self.alpha,
            c_hat: self.c_hat,
            trivial_margin: self.trivial_margin,
            ceiling: self.ceiling,
            pass: self.pass,
        })
        .expect("summary serializes")
    }
}

/// Ratios `|b(r; y)|/‖y‖²` over `y_set`. Passes when every row respects
/// the weighted trivial bound and the ceiling `max(2, (1 + 4α)/2)`.
///
/// Refused unless `certificate` is a passing uniformity report at `α`.
pub fn decay_scan(
    mu: &PointMeasure,
    n: &NormDescriptor,
    r: f64,
    alpha: f64,
    y_set: &[Vec2],
    certificate: &UniformityReport,
) -> Result<DecayScan, BarycenterError> {
    check_radius(r)?;
    if !(certificate.pass && certificate.alpha == alpha) {
        return Err(BarycenterError::NotUniform(alpha));
    }
    let atoms = mu.ball_atoms(n, Vec2::ZERO, r);
    let mut mass = NeumaierSum::new();
    for &(k, _) in &atoms {
        mass.add(mu.weights()[k]);
    }
    let density = mass.value() / r.powf(alpha);
    let ceiling = decay_ceiling(alpha);
    let mut rows = Vec::with_capacity(y_set.len());
    let mut c_hat: f64 = 0.0;
    let mut trivial_margin = f64::NEG_INFINITY;
    let mut weighted_margin = f64::NEG_INFINITY;
    let mut pass = true;
    for &y in y_set {
        let mut s = NeumaierSum::new();
        for &(k, _) in &atoms {
            s.add(mu.weights()[k] * n.polarization(mu.points()[k], y));
        }
        let abs_b = (s.value() / r.powf(alpha)).abs();
        let norm_y = n.eval(y);
        let ratio = abs_b / (norm_y * norm_y);
        if norm_y <= r / 2.0 {
            c_hat = c_hat.max(ratio);
        }
        trivial_margin = trivial_margin.max(abs_b - r * norm_y);
        let wm = abs_b - density * r * norm_y * (1.0 + TRIVIAL_SLACK);
        weighted_margin = weighted_margin.max(wm);
        if wm > 0.0 || ratio > ceiling {
            pass = false;
        }
        rows.push(DecayRow {
            y,
            norm_y,
            abs_b,
            ratio,
        });
    }
    Ok(DecayScan {
        r,
        alpha,
        rows,
        c_hat,
        trivial_margin,
        weighted_margin,
        ceiling,
        pass,
    })
}

/// `max |⟨b_μ(ρ), w⟩|` over the grid. Diagnostic only.
pub fn barycenter_pairing_check(
    mu: &PointMeasure,
    n: &NormDescriptor,
    alpha: f64,
    rho_set: &[f64],
    w_set: &[Vec2],
) -> Result<f64, BarycenterError> {
    let mut worst: f64 = 0.0;
    for &rho in rho_set {
        let b = nonlinear_barycenter(mu, n, rho, alpha)?.value;
        for w in w_set {
            worst = worst.max(b.dot(*w).abs());
        }
    }
    Ok(worst)
}
