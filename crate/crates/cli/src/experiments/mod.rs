//! Experiment runners. Each returns a [`Report`] whose rows are in config
//! order regardless of thread count.

mod geometry;
mod measures;
mod touching;

use crate::config::{Experiment, ExperimentConfig, MeasureEntry, ParallelogramConfig, RadiiGrid, Tolerances};
use crate::table::Report;
use anyhow::{bail, Context, Result};
use planar_density::measures::PointMeasure;
use planar_density::touching::ParallelogramSpec;
use planar_density::{NormDescriptor, Vec2};
use rayon::prelude::*;

pub struct Loaded {
    pub entry: MeasureEntry,
    pub mu: PointMeasure,
}

pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub seed: u64,
    pub norms: Vec<(String, NormDescriptor)>,
    pub measures: Vec<Loaded>,
}

impl Ctx {
    /// Builds the norms and generates every measure.
    pub fn build(cfg: ExperimentConfig, seed: u64, with_measures: bool) -> Result<Self> {
        let norms = cfg
            .norms
            .iter()
            .enumerate()
            .map(|(i, e)| e.build().with_context(|| format!("norm #{i}")))
            .collect::<Result<Vec<_>>>()?;
        let measures = if with_measures {
            cfg.measures
                .par_iter()
                .map(|e| {
                    let mu = e
                        .generator
                        .generate(seed)
                        .with_context(|| format!("generating measure {:?}", e.name))?;
                    Ok(Loaded { entry: e.clone(), mu })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            cfg,
            seed,
            norms,
            measures,
        })
    }

    pub fn require_norms(&self) -> Result<()> {
        if self.norms.is_empty() {
            bail!("config lists no norms");
        }
        Ok(())
    }

    pub fn require_measures(&self) -> Result<()> {
        if self.cfg.measures.is_empty() {
            bail!("config lists no measures");
        }
        for m in &self.cfg.measures {
            if let Some(bad) = m.norms.iter().flatten().find(|&&i| i >= self.norms.len()) {
                bail!("measure {:?} refers to norm #{bad}, but only {} are listed", m.name, self.norms.len());
            }
        }
        Ok(())
    }

    pub fn alpha(&self, m: &MeasureEntry) -> Result<f64> {
        m.alpha
            .or(self.cfg.alpha)
            .or_else(|| m.generator.nominal_dimension())
            .with_context(|| format!("measure {:?}: no exponent given and none implied by the generator", m.name))
    }

    pub fn centers(&self, m: &MeasureEntry) -> Result<Vec<Vec2>> {
        let c = m.centers.clone().unwrap_or_else(|| self.cfg.centers.clone());
        if c.is_empty() {
            bail!("measure {:?}: no centers", m.name);
        }
        Ok(c)
    }

    pub fn radii(&self, m: &MeasureEntry) -> Result<Vec<f64>> {
        pick_radii(&m.radii, &self.cfg.radii).with_context(|| format!("measure {:?}: radii", m.name))
    }

    pub fn fit_radii(&self, m: &MeasureEntry) -> Result<Vec<f64>> {
        pick_radii(&m.fit_radii, &self.cfg.fit_radii).with_context(|| format!("measure {:?}: fit_radii", m.name))
    }

    pub fn tolerances(&self, m: &MeasureEntry) -> Tolerances {
        self.cfg.tolerances.merged(m.tolerances.as_ref())
    }

    /// Norm indices paired with measure `m`.
    pub fn norm_ids(&self, m: usize) -> Vec<usize> {
        match &self.measures[m].entry.norms {
            Some(ids) => ids.clone(),
            None => (0..self.norms.len()).collect(),
        }
    }

    /// Every (measure, norm) pair in config order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.measures.len())
            .flat_map(|m| self.norm_ids(m).into_iter().map(move |n| (m, n)))
            .collect()
    }
}

fn pick_radii(own: &Option<RadiiGrid>, global: &Option<RadiiGrid>) -> Result<Vec<f64>> {
    match own.as_ref().or(global.as_ref()) {
        Some(g) => g.values(),
        None => bail!("missing"),
    }
}

/// `p` itself when it lies within the resolution of the support, else the
/// nearest atom (Euclidean; ties go to the lower index).
pub fn snap(mu: &PointMeasure, p: Vec2) -> Vec2 {
    if mu.nearest_distance(p) <= mu.resolution() {
        return p;
    }
    let mut best = (f64::INFINITY, p);
    for q in mu.points() {
        let d = (*q - p).norm_sq();
        if d < best.0 {
            best = (d, *q);
        }
    }
    best.1
}

pub fn parallelogram(p: &ParallelogramConfig) -> Result<ParallelogramSpec> {
    Ok(match (p.h_v, p.h_w) {
        (Some(a), Some(b)) => ParallelogramSpec::new(p.v, p.w, a, b)?,
        (None, None) => ParallelogramSpec::unit_sides(p.v, p.w)?,
        _ => bail!("give both half-widths or neither"),
    })
}

/// Maps `f` over `items` in parallel, keeping their order.
pub fn par_rows<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

pub fn run(kind: Experiment, cfg: ExperimentConfig, seed: u64) -> Result<Report> {
    if let Some(e) = cfg.experiment {
        if e != kind {
            bail!("config is for {:?} but the {:?} subcommand was run", e.name(), kind.name());
        }
    }
    let needs_measures = !matches!(kind, Experiment::Monotonicity | Experiment::Shear);
    let ctx = Ctx::build(cfg, seed, needs_measures)?;
    match kind {
        Experiment::Density => measures::density(&ctx),
        Experiment::Marstrand => measures::marstrand(&ctx),
        Experiment::Decay => measures::decay(&ctx),
        Experiment::Barycenter => measures::barycenter(&ctx),
        Experiment::Radial => measures::radial(&ctx),
        Experiment::Annuli => measures::annuli(&ctx),
        Experiment::Monotonicity => geometry::monotonicity(&ctx),
        Experiment::Shear => geometry::shear(&ctx),
        Experiment::Touching => touching::touching(&ctx),
        Experiment::Pipeline => touching::pipeline(&ctx),
    }
}
