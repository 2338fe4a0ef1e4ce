use super::{par_rows, parallelogram, Ctx};
use crate::config::{CenterGrid, PipelineStep, ScanRange, TouchVerdict};
use crate::table::{Report, Row, Table};
use anyhow::{bail, Context, Result};
use planar_density::geometry::{find_two_strict_directions, MonotonicityParams};
use planar_density::measures::PointMeasure;
use planar_density::touching::{
    classify_touches, lipschitz_graph_scan, GraphScan, ParallelogramSpec, TouchClass, TouchReport, DEFAULT_TAU,
};
use planar_density::{LinearMap2, Vec2};
use serde_json::json;

const DEFAULT_LIPSCHITZ_MAX: f64 = 1.0 + 1e-6;

fn verdict(rep: &TouchReport) -> &'static str {
    if rep.touches.is_empty() {
        "none"
    } else if rep.vertex_only() {
        TouchVerdict::VertexOnly.as_str()
    } else {
        TouchVerdict::Edge.as_str()
    }
}

/// First edge touch if there is one, else the first touch.
fn witness(rep: &TouchReport) -> Option<Vec2> {
    rep.touches
        .iter()
        .find(|t| t.class != TouchClass::Vertex)
        .or(rep.touches.first())
        .map(|t| t.point)
}

fn touch_row(row: Row, rep: &TouchReport, back: &LinearMap2) -> Row {
    row.with("d", rep.d)
        .with("touches", rep.touches.len())
        .with("vertex", rep.vertex_count())
        .with("edge", rep.edge_count())
        .with("verdict", verdict(rep))
        .point("witness", back.apply(witness(rep).unwrap_or(Vec2::new(f64::NAN, f64::NAN))))
}

fn scan_rows(row: &Row, scan: &GraphScan, back: &LinearMap2) -> Vec<Row> {
    scan.samples
        .iter()
        .map(|s| {
            let p = back.apply(scan.frame.from_frame(Vec2::new(s.t, s.f_t)));
            row.clone()
                .with("t", s.t)
                .with("f_t", s.f_t)
                .with("class", s.class.label())
                .with("d", s.d)
                .point("point", p)
        })
        .collect()
}

fn scan_summary(row: Row, scan: &GraphScan) -> Row {
    row.with("samples", scan.samples.len())
        .with("lipschitz", scan.lipschitz)
        .with("violations", scan.violations)
        .with("aborted_at", scan.aborted_at)
        .with("abort_reason", scan.abort_reason.clone())
}

pub fn touching(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    let s = ctx.cfg.touching.as_ref().context("touching needs a `touching` block")?;
    let p = parallelogram(&s.parallelogram)?;
    let tau = s.tau.unwrap_or(DEFAULT_TAU);
    let centers = s.centers.points();
    if centers.is_empty() {
        bail!("touching.centers is empty");
    }
    let jobs: Vec<(usize, Vec2)> = (0..ctx.measures.len())
        .flat_map(|m| centers.iter().map(move |c| (m, *c)))
        .collect();
    let id = LinearMap2::IDENTITY;
    let rows = par_rows(&jobs, |&(m, c)| {
        let l = &ctx.measures[m];
        let row = Row::new()
            .with("measure", l.entry.name.as_str())
            .point("center", c)
            .measure(&l.mu);
        match classify_touches(&p, c, &l.mu, tau) {
            Err(e) => row.error(e, s.expect.is_some()),
            Ok(rep) => {
                let row = touch_row(row, &rep, &id);
                match s.expect {
                    Some(v) => row.with("expected", v.as_str()).check(verdict(&rep) == v.as_str()),
                    None => row,
                }
            }
        }
    });

    let mut tables = vec![Table::new("touches", rows)];
    let mut headers = Vec::new();
    if let Some(sc) = s.scan {
        let lip_max = ctx.cfg.tolerances.lipschitz_max.unwrap_or(DEFAULT_LIPSCHITZ_MAX);
        let ids: Vec<usize> = (0..ctx.measures.len()).collect();
        let out = par_rows(&ids, |&m| {
            let l = &ctx.measures[m];
            let row = Row::new().with("measure", l.entry.name.as_str()).measure(&l.mu);
            let res = classify_touches(&p, sc.seed_center, &l.mu, tau)
                .and_then(|seed| lipschitz_graph_scan(&p, &l.mu, &seed, (sc.t_min, sc.t_max), sc.step, tau));
            match res {
                Err(e) => (Vec::new(), row.error(e, true), json!(null)),
                Ok(scan) => {
                    let samples = scan_rows(&row, &scan, &id);
                    let ok = scan.aborted_at.is_none() && scan.violations == 0 && scan.lipschitz <= lip_max;
                    (samples, scan_summary(row, &scan).check(ok), scan.header_json())
                }
            }
        });
        let mut samples = Vec::new();
        let mut summaries = Vec::new();
        for (a, b, h) in out {
            samples.extend(a);
            summaries.push(b);
            headers.push(h);
        }
        tables.push(Table::new("scan", samples));
        tables.push(Table::new("scan_summary", summaries));
    }
    Ok(Report {
        experiment: "touching",
        seed: ctx.seed,
        tables,
        summary: json!({ "parallelogram": p, "tau": tau, "scans": headers }),
    })
}

pub fn pipeline(ctx: &Ctx) -> Result<Report> {
    let settings = ctx.cfg.pipeline.as_ref().context("pipeline needs a `pipeline` block")?;
    let mut report = match settings.step {
        PipelineStep::I => super::measures::marstrand(ctx)?,
        PipelineStep::Ii => ray_mass(ctx)?,
        PipelineStep::Iii => {
            let centers = settings
                .centers
                .as_ref()
                .context("step iii needs `pipeline.centers`")?;
            case_split(ctx, centers, settings.tau.unwrap_or(DEFAULT_TAU), settings.scan)?
        }
    };
    report.experiment = "pipeline";
    report.summary["step"] = json!(settings.step);
    report.summary["status"] = json!("empirical");
    Ok(report)
}

/// Atom mass on the norm's non-differentiability rays through the origin.
fn ray_mass(ctx: &Ctx) -> Result<Report> {
    ctx.require_measures()?;
    ctx.require_norms()?;
    let rows = par_rows(&ctx.pairs(), |&(m, n)| {
        let l = &ctx.measures[m];
        let (label, norm) = &ctx.norms[n];
        let mut count = 0usize;
        let mut mass = planar_density::sum::NeumaierSum::new();
        for (p, w) in l.mu.points().iter().zip(l.mu.weights()) {
            if norm.is_on_ray(*p) {
                count += 1;
                mass.add(*w);
            }
        }
        let total = l.mu.total_mass();
        Row::new()
            .with("measure", l.entry.name.as_str())
            .with("norm", label.as_str())
            .with("ray_atoms", count)
            .with("ray_mass", mass.value())
            .with("total_mass", total)
            .with("fraction", mass.value() / total)
            .measure(&l.mu)
    });
    Ok(Report {
        experiment: "pipeline",
        seed: ctx.seed,
        tables: vec![Table::new("ray_mass", rows)],
        summary: json!({}),
    })
}

struct Frame {
    label: String,
    map: LinearMap2,
    p: ParallelogramSpec,
    directions: Option<(Vec2, Vec2)>,
}

fn frames(ctx: &Ctx) -> Result<Vec<Result<Frame, String>>> {
    let settings = ctx.cfg.pipeline.as_ref().expect("checked");
    if let Some(pc) = &settings.parallelogram {
        return Ok(vec![Ok(Frame {
            label: "given".into(),
            map: LinearMap2::IDENTITY,
            p: parallelogram(pc)?,
            directions: None,
        })]);
    }
    ctx.require_norms()?;
    let params = MonotonicityParams::default();
    Ok(ctx
        .norms
        .iter()
        .map(|(label, norm)| {
            let t = find_two_strict_directions(norm, &params).map_err(|e| e.to_string())?;
            let p = ParallelogramSpec::unit_sides(t.nu1, t.nu2).map_err(|e| e.to_string())?;
            Ok(Frame {
                label: label.clone(),
                map: t.map,
                p,
                directions: Some((t.nu1, t.nu2)),
            })
        })
        .collect())
}

/// Touching centers off the support, classified in the frame where both
/// side normals are strict directions.
fn case_split(ctx: &Ctx, centers: &CenterGrid, tau: f64, scan: Option<ScanRange>) -> Result<Report> {
    ctx.require_measures()?;
    let frames = frames(ctx)?;
    let centers = centers.points();
    let jobs: Vec<(usize, usize)> = (0..ctx.measures.len())
        .flat_map(|m| (0..frames.len()).map(move |f| (m, f)))
        .collect();
    let out = par_rows(&jobs, |&(m, f)| {
        let l = &ctx.measures[m];
        let head = Row::new().with("measure", l.entry.name.as_str()).measure(&l.mu);
        let fr = match &frames[f] {
            Ok(fr) => fr,
            Err(e) => return (Vec::new(), Vec::new(), head.error(e, false), json!(null)),
        };
        let head = head.with("norm", fr.label.as_str());
        let e: PointMeasure = l.mu.push_forward(&fr.map);
        let back = fr.map.inverse();
        let mut rows = Vec::new();
        let mut seed: Option<TouchReport> = None;
        let (mut edge, mut vertex, mut skipped) = (0usize, 0usize, 0usize);
        for &c in &centers {
            let row = head.clone().point("center", c);
            if l.mu.nearest_distance(c) <= l.mu.resolution() {
                skipped += 1;
                rows.push(row.with("verdict", "on_support"));
                continue;
            }
            match classify_touches(&fr.p, fr.map.apply(c), &e, tau) {
                Err(err) => rows.push(row.error(err, false)),
                Ok(rep) => {
                    if rep.vertex_only() {
                        vertex += 1;
                        if seed.is_none() {
                            seed = Some(rep.clone());
                        }
                    } else if !rep.touches.is_empty() {
                        edge += 1;
                    }
                    rows.push(touch_row(row, &rep, &back));
                }
            }
        }
        let case = if edge > 0 {
            "edge_touch"
        } else if vertex > 0 {
            "vertex_only"
        } else {
            "none"
        };
        let mut summary = head
            .clone()
            .with("centers", centers.len())
            .with("on_support", skipped)
            .with("edge_cases", edge)
            .with("vertex_only_cases", vertex)
            .with("case", case);
        if let Some((a, b)) = fr.directions {
            summary = summary.point("nu1", a).point("nu2", b);
        }
        let mut samples = Vec::new();
        let mut header = json!(null);
        if let (Some(sr), Some(seed)) = (scan, seed.filter(|_| edge == 0)) {
            match lipschitz_graph_scan(&fr.p, &e, &seed, (sr.t_min, sr.t_max), sr.step, tau) {
                Err(err) => summary = summary.with("scan_error", err.to_string()),
                Ok(gs) => {
                    samples = scan_rows(&head, &gs, &back);
                    summary = scan_summary(summary, &gs);
                    header = gs.header_json();
                }
            }
        }
        (rows, samples, summary, header)
    });
    let (mut rows, mut samples, mut summaries, mut headers) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (a, b, c, d) in out {
        rows.extend(a);
        samples.extend(b);
        summaries.push(c);
        headers.push(d);
    }
    let mut tables = vec![Table::new("touches", rows), Table::new("cases", summaries)];
    if !samples.is_empty() {
        tables.push(Table::new("scan", samples));
    }
    Ok(Report {
        experiment: "pipeline",
        seed: ctx.seed,
        tables,
        summary: json!({ "tau": tau, "scans": headers }),
    })
}
