//! Browser bindings. Every function takes plain numbers or JSON strings and
//! returns a JSON string, so the page needs no generated TypeScript types.

use planar_density::density::{density_profile, estimate_alpha};
use planar_density::geometry::{classify_monotonicity, MonotonicityParams};
use planar_density::measures::{four_corner, gen_hausdorff1_segment, gen_ifs, gen_lebesgue, Normalization, PointMeasure, Rect, Sampling};
use planar_density::touching::{classify_touches, ParallelogramSpec, TouchClass, DEFAULT_TAU};
use planar_density::{NormDescriptor, Vec2};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn parse_norm(spec: &str) -> Result<NormDescriptor, String> {
    serde_json::from_str(spec).map_err(|e| format!("norm: {e}"))
}

fn finish(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Unit sphere samples plus the monotonicity class of `directions` evenly
/// spaced directions in the upper half plane, starting at `e1`.
pub fn norm_ball_json(norm: &str, samples: usize, directions: usize) -> String {
    finish((|| {
        let n = parse_norm(norm)?;
        let boundary: Vec<Vec2> = (0..samples.max(8))
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / samples.max(8) as f64;
                n.boundary_point(Vec2::new(t.cos(), t.sin()))
            })
            .collect();
        let params = MonotonicityParams::default();
        let classes = (0..directions.max(1))
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / directions.max(1) as f64;
                let rep = classify_monotonicity(&n, Vec2::new(t.cos(), t.sin()), &params).map_err(|e| e.to_string())?;
                Ok(json!({ "nu": rep.nu, "class": rep.class.as_str(), "min_dot": rep.min_dot, "witness": rep.witness }))
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(json!({ "label": n.label(), "boundary": boundary, "area": n.unit_ball_area(), "classes": classes }))
    })())
}

fn demo_measure(kind: &str, n: &NormDescriptor, atoms: usize, seed: u64) -> Result<(PointMeasure, f64), String> {
    let uniform = Normalization::Uniform { norm: n.clone() };
    match kind {
        "lebesgue" => gen_lebesgue(Rect::centered(4.0), atoms, seed, Sampling::Stratified, &uniform).map(|m| (m, 2.0)),
        "segment" => gen_hausdorff1_segment(Vec2::new(1.0, 0.3), 1.0, 2.0 / atoms.max(2) as f64, &uniform).map(|m| (m, 1.0)),
        "four_corner" => {
            let depth = ((atoms.max(4) as f64).ln() / 4f64.ln()).floor().min(9.0) as u32;
            gen_ifs(&four_corner(0.25, depth)).map(|m| (m, 1.0))
        }
        other => return Err(format!("unknown measure {other:?}")),
    }
    .map_err(|e| e.to_string())
}

/// Density ratios `μ(B(x, r)) / r^α` on a geometric radius grid, with a
/// log-log fit of the exponent.
pub fn density_json(norm: &str, measure: &str, atoms: usize, seed: u64, cx: f64, cy: f64) -> String {
    finish((|| {
        let n = parse_norm(norm)?;
        let (mu, alpha) = demo_measure(measure, &n, atoms, seed)?;
        let (lo, hi) = mu.trusted_window();
        let radii: Vec<f64> = (0..24).map(|k| lo * (hi / lo).powf(k as f64 / 23.0)).collect();
        let x = Vec2::new(cx, cy);
        let prof = density_profile(&mu, &n, x, alpha, &radii).map_err(|e| e.to_string())?;
        // needs a wider window than the profile; skipped for small measures
        let fit = estimate_alpha(&mu, &n, x, &radii).ok();
        let shown: Vec<Vec2> = mu.points().iter().step_by((mu.len() / 4000).max(1)).copied().collect();
        Ok(json!({
            "alpha": alpha,
            "radii": prof.radii,
            "values": prof.values,
            "oscillation": prof.oscillation,
            "fit": fit.map(|f| json!({ "alpha": f.alpha, "r_squared": f.r_squared })),
            "window": [lo, hi],
            "points": shown,
            "warning": prof.warning,
        }))
    })())
}

/// Largest empty copy of the parallelogram spanned by `v`, `w` around `x`,
/// grown until it meets the line through the origin with direction `(1, s)`,
/// and the classified touching points.
pub fn touching_json(v: [f64; 2], w: [f64; 2], x: [f64; 2], slope: f64) -> String {
    finish((|| {
        let p = ParallelogramSpec::unit_sides(v.into(), w.into()).map_err(|e| e.to_string())?;
        let dir = Vec2::new(1.0, slope);
        let e = gen_hausdorff1_segment(dir, 4.0, 1e-3, &Normalization::Raw).map_err(|e| e.to_string())?;
        let x: Vec2 = x.into();
        let rep = classify_touches(&p, x, &e, DEFAULT_TAU).map_err(|e| e.to_string())?;
        let verts: Vec<Vec2> = p.vertices().iter().map(|c| x + *c * rep.d).collect();
        let touches: Vec<Value> = rep
            .touches
            .iter()
            .map(|t| {
                let class = match t.class {
                    TouchClass::Vertex => "vertex",
                    TouchClass::Edge(_) => "edge",
                };
                json!({ "point": t.point, "class": class })
            })
            .collect();
        Ok(json!({
            "d": rep.d,
            "vertices": verts,
            "touches": touches,
            "vertex_only": rep.vertex_only(),
            "line": [dir * -4.0 / dir.norm(), dir * 4.0 / dir.norm()],
        }))
    })())
}

#[wasm_bindgen]
pub fn norm_ball(norm: &str, samples: usize, directions: usize) -> String {
    norm_ball_json(norm, samples, directions)
}

#[wasm_bindgen]
pub fn density(norm: &str, measure: &str, atoms: usize, seed: u32, cx: f64, cy: f64) -> String {
    density_json(norm, measure, atoms, seed as u64, cx, cy)
}

#[wasm_bindgen]
pub fn touching(vx: f64, vy: f64, wx: f64, wy: f64, cx: f64, cy: f64, slope: f64) -> String {
    touching_json([vx, vy], [wx, wy], [cx, cy], slope)
}
