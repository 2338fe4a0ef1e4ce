use super::{par_rows, snap, Ctx};
use crate::config::{Tolerances, Verdict};
use crate::table::{Report, Row, Table};
use anyhow::{bail, Context, Result};
use planar_density::barycenter::{decay_scan, nonlinear_barycenter, TRIVIAL_SLACK};
use planar_density::density::{
    annuli_packing_check, density_profile, estimate_alpha, radial_integral_check, uniformity_check, UniformityReport,
};
use planar_density::Vec2;
use serde_json::json;

const DEFAULT_CONVERGING_MAX: f64 = 1.05;
const DEFAULT_OSCILLATING_MIN: f64 = 1.3;

struct Job {
    m: usize,
    n: usize,
    center: Vec2,
}

fn triples(ctx: &Ctx) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for (m, l) in ctx.measures.iter().enumerate() {
        for center in ctx.centers(&l.entry)? {
            for n in ctx.norm_ids(m) {
                jobs.push(Job { m, n, center });
            }
        }
    }
    Ok(jobs)
}

fn base_row(ctx: &Ctx, m: usize, n: usize) -> Row {
    Row::new()
        .with("measure", ctx.measures[m].entry.name.as_str())
        .with("norm", ctx.norms[n].0.as_str())
        .measure(&ctx.measures[m].mu)
}

pub fn density(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    for l in &ctx.measures {
        ctx.radii(&l.entry)?;
        ctx.alpha(&l.entry)?;
    }
    let jobs = triples(ctx)?;
    let out = par_rows(&jobs, |j| {
        let l = &ctx.measures[j.m];
        let (_, norm) = &ctx.norms[j.n];
        let tol = ctx.tolerances(&l.entry);
        let alpha = ctx.alpha(&l.entry).expect("validated");
        let radii = ctx.radii(&l.entry).expect("validated");
        let target = l.entry.expect.density.map(|t| t.value(norm));
        let checks_values = target.is_some() && tol.density_rel.is_some();
        let head = base_row(ctx, j.m, j.n).point("center", j.center).with("alpha", alpha);
        match density_profile(&l.mu, norm, j.center, alpha, &radii) {
            Err(e) => (Vec::new(), head.error(e, checks_values || tol.converging_max.is_some())),
            Ok(p) => {
                let mut rows = Vec::with_capacity(radii.len());
                for (r, v) in p.radii.iter().zip(&p.values) {
                    let mut row = base_row(ctx, j.m, j.n)
                        .point("center", j.center)
                        .with("r", *r)
                        .with("value", *v)
                        .with("target", target);
                    if let (Some(t), Some(rel)) = (target, tol.density_rel) {
                        let err = (v / t - 1.0).abs();
                        row = row.with("rel_err", err).check(err <= rel);
                    }
                    rows.push(row);
                }
                let osc = p.oscillation;
                let mut summary = head
                    .with("oscillation", osc)
                    .with("min", p.values.iter().copied().fold(f64::INFINITY, f64::min))
                    .with("max", p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                    .with("warning", p.warning.clone());
                if let Some(cmax) = tol.converging_max {
                    summary = summary.check(osc.is_some_and(|o| o <= cmax));
                }
                (rows, summary)
            }
        }
    });
    let mut profiles = Vec::new();
    let mut summaries = Vec::new();
    for (rows, s) in out {
        profiles.extend(rows);
        summaries.push(s);
    }
    Ok(Report {
        experiment: "density",
        seed: ctx.seed,
        tables: vec![Table::new("profile", profiles), Table::new("summary", summaries)],
        summary: json!({}),
    })
}

fn verdict(osc: f64, tol: &Tolerances) -> &'static str {
    if osc <= tol.converging_max.unwrap_or(DEFAULT_CONVERGING_MAX) {
        Verdict::Converging.as_str()
    } else if osc >= tol.oscillating_min.unwrap_or(DEFAULT_OSCILLATING_MIN) {
        Verdict::Oscillating.as_str()
    } else {
        "indeterminate"
    }
}

/// The fleet needs an integer-dimensional and a non-integer-dimensional
/// member.
fn check_fleet(ctx: &Ctx) -> Result<()> {
    let dims: Vec<f64> = ctx
        .measures
        .iter()
        .map(|l| ctx.alpha(&l.entry))
        .collect::<Result<_>>()?;
    let integer = dims.iter().any(|d| (d - d.round()).abs() < 1e-9);
    let fractional = dims.iter().any(|d| (d - d.round()).abs() >= 1e-9);
    if !(integer && fractional) {
        bail!("marstrand needs at least one integer-dimensional and one non-integer-dimensional measure");
    }
    Ok(())
}

pub fn marstrand(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    check_fleet(ctx)?;
    for l in &ctx.measures {
        ctx.radii(&l.entry)?;
        ctx.fit_radii(&l.entry)?;
    }
    let jobs = triples(ctx)?;
    let rows = par_rows(&jobs, |j| {
        let l = &ctx.measures[j.m];
        let (_, norm) = &ctx.norms[j.n];
        let tol = ctx.tolerances(&l.entry);
        let alpha = ctx.alpha(&l.entry).expect("validated");
        let expect = l.entry.expect.verdict;
        let row = base_row(ctx, j.m, j.n)
            .point("center", j.center)
            .with("alpha", alpha)
            .with("expected", expect.map(Verdict::as_str));
        let asserted = expect.is_some() || tol.alpha_abs.is_some();
        let fit = match estimate_alpha(&l.mu, norm, j.center, &ctx.fit_radii(&l.entry).expect("validated")) {
            Ok(f) => f,
            Err(e) => return row.error(e, asserted),
        };
        let row = row.with("alpha_hat", fit.alpha).with("r_squared", fit.r_squared);
        let p = match density_profile(&l.mu, norm, j.center, alpha, &ctx.radii(&l.entry).expect("validated")) {
            Ok(p) => p,
            Err(e) => return row.error(e, asserted),
        };
        let osc = p.oscillation.unwrap_or(f64::NAN);
        let v = verdict(osc, &tol);
        let mut row = row.with("oscillation", osc).with("verdict", v);
        if let Some(e) = expect {
            row = row.check(v == e.as_str());
        }
        if let Some(t) = tol.alpha_abs {
            row = row.check((fit.alpha - alpha).abs() <= t);
        }
        row
    });
    Ok(Report {
        experiment: "marstrand",
        seed: ctx.seed,
        tables: vec![Table::new("fleet", rows)],
        summary: json!({}),
    })
}

fn certify(ctx: &Ctx, m: usize, n: usize, alpha: f64) -> Result<UniformityReport> {
    let u = ctx
        .cfg
        .uniformity
        .as_ref()
        .context("this experiment needs a `uniformity` block")?;
    let l = &ctx.measures[m];
    Ok(uniformity_check(
        &l.mu,
        &ctx.norms[n].1,
        alpha,
        u.centers,
        &u.radii.values()?,
        u.tolerance,
        ctx.seed,
    )?)
}

fn require_origin(ctx: &Ctx, m: usize) -> Result<()> {
    let mu = &ctx.measures[m].mu;
    let d = mu.nearest_distance(Vec2::ZERO);
    if !(d <= mu.resolution()) {
        bail!("the origin is {d:e} from the support, beyond the resolution {:e}", mu.resolution());
    }
    Ok(())
}

pub fn decay(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    if ctx.cfg.scales.is_empty() || ctx.cfg.offsets.is_empty() {
        bail!("decay needs `scales` (radii r) and `offsets` (y/r)");
    }
    ctx.cfg.uniformity.as_ref().context("decay needs a `uniformity` block")?;
    let pairs = ctx.pairs();
    let out = par_rows(&pairs, |&(m, n)| decay_pair(ctx, m, n));
    let (mut ys, mut scans, mut stab, mut summary) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (a, b, c, s) in out {
        ys.extend(a);
        scans.extend(b);
        stab.push(c);
        summary.push(s);
    }
    Ok(Report {
        experiment: "decay",
        seed: ctx.seed,
        tables: vec![
            Table::new("ratios", ys),
            Table::new("scans", scans),
            Table::new("stability", stab),
        ],
        summary: json!({ "pairs": summary }),
    })
}

fn decay_pair(ctx: &Ctx, m: usize, n: usize) -> (Vec<Row>, Vec<Row>, Row, serde_json::Value) {
    let l = &ctx.measures[m];
    let norm = &ctx.norms[n].1;
    let tol = ctx.tolerances(&l.entry);
    let head = base_row(ctx, m, n);
    let pre = ctx.alpha(&l.entry).and_then(|alpha| {
        require_origin(ctx, m)?;
        Ok((alpha, certify(ctx, m, n, alpha)?))
    });
    let (alpha, cert) = match pre {
        Ok(v) => v,
        Err(e) => return (Vec::new(), Vec::new(), head.error(format!("{e:#}"), true), json!(null)),
    };
    let mut ys = Vec::new();
    let mut scans = Vec::new();
    let mut summaries = Vec::new();
    let mut c_hats = Vec::new();
    for &r in &ctx.cfg.scales {
        let y_set: Vec<Vec2> = ctx.cfg.offsets.iter().map(|o| snap(&l.mu, *o * r)).collect();
        let scan = match decay_scan(&l.mu, norm, r, alpha, &y_set, &cert) {
            Ok(s) => s,
            Err(e) => {
                scans.push(base_row(ctx, m, n).with("r", r).error(e, true));
                continue;
            }
        };
        let density = l.mu.ball_mass(norm, Vec2::ZERO, r) / r.powf(alpha);
        for row in &scan.rows {
            let bound = density * r * row.norm_y * (1.0 + TRIVIAL_SLACK);
            let mut ok = row.abs_b <= bound && row.ratio <= scan.ceiling;
            if let Some(t) = tol.decay_ratio_max {
                ok &= row.ratio <= t;
            }
            ys.push(
                base_row(ctx, m, n)
                    .with("r", r)
                    .point("y", row.y)
                    .with("norm_y", row.norm_y)
                    .with("abs_b", row.abs_b)
                    .with("ratio", row.ratio)
                    .with("trivial_bound", bound)
                    .check(ok),
            );
        }
        c_hats.push(scan.c_hat);
        scans.push(
            base_row(ctx, m, n)
                .with("r", r)
                .with("alpha", alpha)
                .with("C_hat", scan.c_hat)
                .with("trivial_margin", scan.trivial_margin)
                .with("weighted_margin", scan.weighted_margin)
                .with("ceiling", scan.ceiling)
                .check(scan.pass),
        );
        summaries.push(scan.summary_json());
    }
    let mut stab = head.with("scales", c_hats.len());
    if c_hats.is_empty() {
        stab = stab.error("no scan succeeded", true);
    } else {
        let mut sorted = c_hats.clone();
        sorted.sort_by(f64::total_cmp);
        let k = sorted.len();
        let median = if k % 2 == 1 {
            sorted[k / 2]
        } else {
            0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
        };
        let dev = c_hats.iter().map(|c| (c / median - 1.0).abs()).fold(0.0, f64::max);
        stab = stab
            .with("C_hat_min", sorted[0])
            .with("C_hat_max", sorted[k - 1])
            .with("C_hat_median", median)
            .with("deviation", dev);
        if let Some(t) = tol.c_hat_stability {
            stab = stab.check(dev <= t);
        }
    }
    let summary = json!({
        "measure": l.entry.name,
        "norm": ctx.norms[n].0,
        "certificate": cert,
        "scans": summaries,
    });
    (ys, scans, stab, summary)
}

pub fn barycenter(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    if ctx.cfg.scales.is_empty() {
        bail!("barycenter needs `scales` (radii rho)");
    }
    let jobs: Vec<(usize, usize, f64)> = ctx
        .pairs()
        .into_iter()
        .flat_map(|(m, n)| ctx.cfg.scales.iter().map(move |&r| (m, n, r)))
        .collect();
    let rows = par_rows(&jobs, |&(m, n, rho)| {
        let l = &ctx.measures[m];
        let tol = ctx.tolerances(&l.entry);
        let asserted = tol.barycenter_abs.is_some() || tol.barycenter_rel_mass.is_some();
        let row = base_row(ctx, m, n).with("rho", rho);
        let alpha = match ctx.alpha(&l.entry) {
            Ok(a) => a,
            Err(e) => return row.error(format!("{e:#}"), asserted),
        };
        if let Err(e) = require_origin(ctx, m) {
            return row.error(format!("{e:#}"), asserted);
        }
        match nonlinear_barycenter(&l.mu, &ctx.norms[n].1, rho, alpha) {
            Err(e) => row.error(e, asserted),
            Ok(b) => {
                let abs = b.value.norm();
                let allowed = tol.barycenter_abs.unwrap_or(0.0) + tol.barycenter_rel_mass.unwrap_or(0.0) * b.mass_scale;
                let row = row
                    .with("alpha", alpha)
                    .point("b", b.value)
                    .with("abs_b", abs)
                    .with("mass_scale", b.mass_scale)
                    .with("ray_fraction", b.ray_fraction)
                    .with("allowed", asserted.then_some(allowed));
                if asserted {
                    row.check(abs <= allowed)
                } else {
                    row
                }
            }
        }
    });
    Ok(Report {
        experiment: "barycenter",
        seed: ctx.seed,
        tables: vec![Table::new("barycenters", rows)],
        summary: json!({}),
    })
}

pub fn radial(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    let g = ctx.cfg.radial.context("radial needs a `radial` block")?.profile;
    ctx.cfg.uniformity.as_ref().context("radial needs a `uniformity` block")?;
    let jobs = triples(ctx)?;
    let mut summary = Vec::new();
    let rows = par_rows(&jobs, |j| {
        let l = &ctx.measures[j.m];
        let tol = ctx.tolerances(&l.entry);
        let asserted = tol.radial_gap.is_some();
        let x = snap(&l.mu, j.center);
        let row = base_row(ctx, j.m, j.n).point("center", x);
        let res = ctx.alpha(&l.entry).and_then(|alpha| {
            let cert = certify(ctx, j.m, j.n, alpha)?;
            let rep = radial_integral_check(
                &l.mu,
                &ctx.norms[j.n].1,
                x,
                alpha,
                |r| g.eval(r),
                g.support(),
                &[g.support()],
                &cert,
            )?;
            Ok((alpha, cert, rep))
        });
        match res {
            Err(e) => (row.error(format!("{e:#}"), asserted), json!(null)),
            Ok((alpha, cert, rep)) => {
                let mut row = row
                    .with("m", alpha)
                    .with("lhs", rep.lhs)
                    .with("rhs", rep.rhs)
                    .with("gap", rep.gap)
                    .with("quadrature_error", rep.quadrature_error)
                    .with("uniformity_deviation", cert.deviation);
                if let Some(t) = tol.radial_gap {
                    row = row.check(rep.gap <= t);
                }
                (row, json!({ "profile": g, "certificate": cert }))
            }
        }
    });
    let rows = rows
        .into_iter()
        .map(|(r, s)| {
            summary.push(s);
            r
        })
        .collect();
    Ok(Report {
        experiment: "radial",
        seed: ctx.seed,
        tables: vec![Table::new("identity", rows)],
        summary: json!({ "rows": summary }),
    })
}

pub fn annuli(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    let counts = ctx
        .cfg
        .annuli
        .as_ref()
        .context("annuli needs an `annuli` block")?
        .counts
        .clone();
    if counts.is_empty() {
        bail!("annuli.counts is empty");
    }
    let jobs: Vec<(Vec2, usize, usize, usize)> = triples(ctx)?
        .into_iter()
        .flat_map(|j| counts.iter().map(move |&k| (j.center, j.m, j.n, k)))
        .collect();
    let rows = par_rows(&jobs, |&(c, m, n, k)| {
        let l = &ctx.measures[m];
        let asserted = l.entry.expect.annuli_packing;
        let x0 = snap(&l.mu, c);
        let row = base_row(ctx, m, n).point("x0", x0).with("N", k);
        let res = ctx.alpha(&l.entry).and_then(|alpha| {
            Ok((alpha, annuli_packing_check(&l.mu, &ctx.norms[n].1, x0, k, alpha)?))
        });
        match res {
            Err(e) => row.error(format!("{e:#}"), asserted),
            Ok((alpha, rep)) => {
                let occupied = rep.occupied.iter().filter(|o| **o).count();
                let packed_ok = rep.packed_mass <= rep.outer_mass * (1.0 + 1e-12);
                let row = row
                    .with("alpha", alpha)
                    .with("occupied", occupied)
                    .with("disjoint", rep.disjoint)
                    .with("contained", rep.contained)
                    .with("lhs", rep.lhs)
                    .with("rhs", rep.rhs)
                    .with("inequality_holds", rep.inequality_holds)
                    .with("packed_mass", rep.packed_mass)
                    .with("outer_mass", rep.outer_mass);
                if asserted {
                    row.check(rep.disjoint && rep.contained && packed_ok)
                } else {
                    row
                }
            }
        }
    });
    Ok(Report {
        experiment: "annuli",
        seed: ctx.seed,
        tables: vec![Table::new("packing", rows)],
        summary: json!({}),
    })
}
