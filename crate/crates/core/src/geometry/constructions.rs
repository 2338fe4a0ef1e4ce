//! Linear changes of variables producing directions of monotonicity.

use super::{
    classify_monotonicity, quantitative_monotonicity, GeometryError, MonotonicityClass,
    MonotonicityParams, MonotonicityReport, QuantitativeMonotonicity, DEFAULT_SIGMA_GRID,
};
use crate::linalg::LinearMap2;
use crate::norms::{Exponent, NormDescriptor, Subdifferential};
use crate::vec2::{line_angle, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Angular separation required between the squeezed farthest point and
/// the squeezed image of the original one.
pub const MIN_SEPARATION: f64 = 5.0 * PI / 180.0;

const EPS_FLOOR: f64 = 1e-8;
const TIE_TOL: f64 = 1e-12;
const FARTHEST_GRID: usize = 8192;

/// A Euclidean-farthest point of the unit sphere. Among maximizers (within
/// a relative `1e-12`), the one spanning the largest angle with the line
/// through `avoid` is returned.
pub fn farthest_point(n: &NormDescriptor, avoid: Option<Vec2>) -> Vec2 {
    let candidates: Vec<Vec2> = if let Some(p) = n.as_polygon() {
        p.vertices().to_vec()
    } else if let NormDescriptor::Lp(Exponent::Finite(p)) = n {
        let p = p.get();
        if p <= 2.0 {
            vec![Vec2::E1, Vec2::E2]
        } else {
            let c = 2f64.powf(-1.0 / p);
            vec![Vec2::new(c, c), Vec2::new(-c, c)]
        }
    } else {
        refined_grid_maxima(n)
    };
    let rmax = candidates.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let ties = candidates
        .into_iter()
        .filter(|v| v.norm() >= rmax * (1.0 - TIE_TOL));
    match avoid {
        None => ties.max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(Vec2::E1),
        Some(d) => ties
            .max_by(|a, b| line_angle(*a, d).total_cmp(&line_angle(*b, d)))
            .unwrap_or(Vec2::E1),
    }
}

/// Local maxima of `θ ↦ |x(θ)|` on a half-circle grid, refined by
/// golden-section search.
fn refined_grid_maxima(n: &NormDescriptor) -> Vec<Vec2> {
    let m = FARTHEST_GRID;
    let h = PI / m as f64;
    let r = |t: f64| n.boundary_point(Vec2::from_angle(t)).norm();
    let vals: Vec<f64> = (0..m).map(|k| r(k as f64 * h)).collect();
    let top = vals.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    for k in 0..m {
        let prev = vals[(k + m - 1) % m];
        let next = vals[(k + 1) % m];
        if vals[k] >= prev && vals[k] >= next && vals[k] >= top * (1.0 - 1e-6) {
            let t = golden_max(&r, (k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
            out.push(n.boundary_point(Vec2::from_angle(t)));
        }
    }
    out
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStrictDirections {
    /// `A` such that both directions are strict for `‖·‖_A = ‖A⁻¹·‖`.
    pub map: LinearMap2,
    pub nu1: Vec2,
    pub nu2: Vec2,
    /// Accepted squeeze factor; `None` on the round-ball branch.
    pub epsilon: Option<f64>,
    pub degenerate: bool,
    pub reports: [MonotonicityReport; 2],
    pub quantitative: [QuantitativeMonotonicity; 2],
}

impl TwoStrictDirections {
    pub fn transformed_norm(&self, n: &NormDescriptor) -> NormDescriptor {
        NormDescriptor::linear_image(self.map, n.clone())
    }
}

/// Two independent directions of strict monotonicity after a linear map.
///
/// `x̄` is rotated onto `e₁` and the ball is squeezed along `e₁` by
/// `diag(ε, 1)`, halving `ε` from `1/2` until the farthest point `x_ε` of the
/// squeezed ball makes an angle of at least [`MIN_SEPARATION`] with `e₁`.
/// Then `ν₁ = e₂` and `ν₂ = x_ε^⊥`. Round balls take the identity with
/// orthogonal directions.
pub fn find_two_strict_directions(
    n: &NormDescriptor,
    params: &MonotonicityParams,
) -> Result<TwoStrictDirections, GeometryError> {
    let (circ, inr) = (n.circumradius(), n.inradius());
    let round = (circ - inr).abs() <= 1e-12 * circ;

    let mut chosen = None;
    if !round {
        let xbar = farthest_point(n, None);
        let rot = LinearMap2::rotation_to_e1(xbar);
        let mut eps = 0.5;
        while eps >= EPS_FLOOR {
            let a = LinearMap2::diag(eps, 1.0)?.compose(&rot)?;
            let squeezed = NormDescriptor::linear_image(a, n.clone());
            let xe = farthest_point(&squeezed, Some(Vec2::E1));
            if line_angle(xe, Vec2::E1) >= MIN_SEPARATION {
                chosen = Some((a, Vec2::E2, xe.perp().normalized(), eps));
                break;
            }
            eps *= 0.5;
        }
    }
    let (map, nu1, nu2, epsilon) = match chosen {
        Some((a, v1, v2, e)) => (a, v1, v2, Some(e)),
        None => (LinearMap2::IDENTITY, Vec2::E1, Vec2::E2, None),
    };

    let image = NormDescriptor::linear_image(map, n.clone());
    let certify = |nu: Vec2| -> Result<MonotonicityReport, GeometryError> {
        let rep = classify_monotonicity(&image, nu, params)?;
        if rep.class != MonotonicityClass::Strict {
            return Err(GeometryError::CertificateFailed {
                nu,
                class: rep.class,
                min_dot: rep.min_dot,
            });
        }
        Ok(rep)
    };
    let reports = [certify(nu1)?, certify(nu2)?];
    let quantitative = [
        quantitative_monotonicity(&image, nu1, &DEFAULT_SIGMA_GRID)?,
        quantitative_monotonicity(&image, nu2, &DEFAULT_SIGMA_GRID)?,
    ];
    Ok(TwoStrictDirections {
        map,
        nu1,
        nu2,
        epsilon,
        degenerate: epsilon.is_none(),
        reports,
        quantitative,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearResult {
    /// `A` with `A(ℓ) = ℓ`; the normal of `ℓ` is weakly monotone for `‖·‖_A`.
    pub map: LinearMap2,
    /// Unit normal of `ℓ`.
    pub normal: Vec2,
    /// Boundary point on the positive side of `ℓ`, original frame.
    pub p_plus: Vec2,
    /// Subgradient used at `p₊`, rotated frame.
    pub w: Vec2,
    pub report: MonotonicityReport,
}

/// Shear fixing the line `ℓ = span(direction)` that makes its normal a
/// direction of weak monotonicity.
///
/// In the frame where `ℓ` is the first axis, `A` solves `Ae₁ = e₁` and
/// `A(Jw) = e₂` with `J = [[0, 1], [−1, 0]]` and `w` the midpoint of the
/// subdifferential at `p₊`; the result is conjugated back.
pub fn shear_for_weak_monotonicity(
    n: &NormDescriptor,
    direction: Vec2,
    params: &MonotonicityParams,
) -> Result<ShearResult, GeometryError> {
    if direction == Vec2::ZERO || !direction.is_finite() {
        return Err(GeometryError::InvalidInput("line direction must be nonzero".into()));
    }
    let rot = LinearMap2::rotation_to_e1(direction);
    let rotated = NormDescriptor::linear_image(rot, n.clone());
    let p_plus = rotated.boundary_point(Vec2::E1);
    let w = match rotated.subdifferential(p_plus) {
        Subdifferential::Segment(s) => s.midpoint(),
        Subdifferential::Origin => unreachable!(),
    };
    if w.x.abs() <= 1e-12 * w.norm() {
        return Err(GeometryError::ShearDegenerate);
    }
    let jw = Vec2::new(w.y, -w.x);
    let a_rot = LinearMap2::from_columns(Vec2::E1, jw)?.inverse();
    let map = rot.inverse().compose(&a_rot)?.compose(&rot)?;
    let normal = rot.apply_inverse(Vec2::E2);

    let image = NormDescriptor::linear_image(map, n.clone());
    let report = classify_monotonicity(&image, normal, params)?;
    if !report.class.at_least_weak() {
        return Err(GeometryError::CertificateFailed {
            nu: normal,
            class: report.class,
            min_dot: report.min_dot,
        });
    }
    Ok(ShearResult {
        map,
        normal,
        p_plus: rot.apply_inverse(p_plus),
        w,
        report,
    })
}
