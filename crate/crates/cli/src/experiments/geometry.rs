use super::{par_rows, Ctx};
use crate::table::{Report, Row, Table};
use anyhow::{bail, Result};
use planar_density::geometry::{
    classify_monotonicity, find_two_strict_directions, quantitative_monotonicity, shear_for_weak_monotonicity,
    MonotonicityParams,
};
use serde_json::json;

const DEFAULT_LINE_FIXED: f64 = 1e-12;
const WEAK_SLACK: f64 = 1e-9;

fn pairs(ctx: &Ctx) -> Vec<(usize, usize)> {
    (0..ctx.norms.len())
        .flat_map(|n| (0..ctx.cfg.directions.len()).map(move |d| (n, d)))
        .filter(|&(n, d)| ctx.cfg.directions[d].applies_to(n))
        .collect()
}

pub fn monotonicity(ctx: &Ctx) -> Result<Report> {
    ctx.require_norms()?;
    let params = MonotonicityParams::default();
    let jobs = pairs(ctx);
    let classify = par_rows(&jobs, |&(n, d)| {
        let (label, norm) = &ctx.norms[n];
        let dir = ctx.cfg.directions[d].checked();
        let asserted = dir.expect.is_some() || dir.min_dot.is_some();
        let row = Row::new().with("norm", label.as_str()).point("nu", dir.nu);
        let rep = match classify_monotonicity(norm, dir.nu, &params) {
            Ok(r) => r,
            Err(e) => return row.error(e, asserted),
        };
        let mut row = row
            .with("class", rep.class.as_str())
            .with("min_dot", rep.min_dot)
            .point("witness", rep.witness);
        if let Some(c) = dir.expect {
            row = row.with("expected", c.as_str()).check(rep.class == c);
        }
        if let Some(m) = dir.min_dot {
            let t = dir.min_dot_tol.unwrap_or(1e-6);
            row = row.check((rep.min_dot - m).abs() <= t);
        }
        row
    });

    let quantitative = if ctx.cfg.sigmas.is_empty() {
        Vec::new()
    } else {
        par_rows(&jobs, |&(n, d)| {
            let (label, norm) = &ctx.norms[n];
            let nu = ctx.cfg.directions[d].checked().nu;
            let head = Row::new().with("norm", label.as_str()).point("nu", nu);
            match quantitative_monotonicity(norm, nu, &ctx.cfg.sigmas) {
                Err(e) => vec![head.error(e, false)],
                Ok(q) => q
                    .table
                    .iter()
                    .map(|sd| head.clone().with("sigma", sd.sigma).with("delta", sd.delta))
                    .collect(),
            }
        })
        .into_iter()
        .flatten()
        .collect()
    };

    let norm_ids: Vec<usize> = (0..ctx.norms.len()).collect();
    let delta_min = ctx.cfg.tolerances.delta_min;
    let two = par_rows(&norm_ids, |&n| {
        let (label, norm) = &ctx.norms[n];
        let row = Row::new().with("norm", label.as_str());
        match find_two_strict_directions(norm, &params) {
            Err(e) => row.error(e, delta_min.is_some()),
            Ok(t) => {
                let m = t.map.rows();
                let delta = t.quantitative[0].delta.min(t.quantitative[1].delta);
                let row = row
                    .point("nu1", t.nu1)
                    .point("nu2", t.nu2)
                    .with("a11", m[0][0])
                    .with("a12", m[0][1])
                    .with("a21", m[1][0])
                    .with("a22", m[1][1])
                    .with("epsilon", t.epsilon)
                    .with("degenerate", t.degenerate)
                    .with("min_dot1", t.reports[0].min_dot)
                    .with("min_dot2", t.reports[1].min_dot)
                    .with("delta", delta);
                match delta_min {
                    Some(d) => row.check(delta > d),
                    None => row,
                }
            }
        }
    });

    let mut tables = vec![Table::new("classify", classify)];
    if !quantitative.is_empty() {
        tables.push(Table::new("quantitative", quantitative));
    }
    tables.push(Table::new("two_strict", two));
    Ok(Report {
        experiment: "monotonicity",
        seed: ctx.seed,
        tables,
        summary: json!({ "params": params }),
    })
}

pub fn shear(ctx: &Ctx) -> Result<Report> {
    ctx.require_norms()?;
    if ctx.cfg.directions.is_empty() {
        bail!("shear needs `directions` (line directions)");
    }
    let params = MonotonicityParams::default();
    let line_tol = ctx.cfg.tolerances.line_fixed.unwrap_or(DEFAULT_LINE_FIXED);
    let rows = par_rows(&pairs(ctx), |&(n, d)| {
        let (label, norm) = &ctx.norms[n];
        let dir = ctx.cfg.directions[d].checked().nu;
        let row = Row::new().with("norm", label.as_str()).point("direction", dir);
        match shear_for_weak_monotonicity(norm, dir, &params) {
            Err(e) => row.error(e, true),
            Ok(s) => {
                let u = dir.normalized();
                let line_err = (s.map.apply(u) - u).norm();
                let m = s.map.rows();
                row.with("a11", m[0][0])
                    .with("a12", m[0][1])
                    .with("a21", m[1][0])
                    .with("a22", m[1][1])
                    .point("normal", s.normal)
                    .with("class", s.report.class.as_str())
                    .with("min_dot", s.report.min_dot)
                    .with("line_error", line_err)
                    .check(s.report.min_dot >= -WEAK_SLACK && line_err <= line_tol)
            }
        }
    });
    Ok(Report {
        experiment: "shear",
        seed: ctx.seed,
        tables: vec![Table::new("shears", rows)],
        summary: json!({ "params": params }),
    })
}
