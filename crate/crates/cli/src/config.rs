//! The experiment config: one JSON document, unknown keys rejected.

use anyhow::{bail, Context, Result};
use planar_density::density::RadialProfile;
use planar_density::measures::GeneratorSpec;
use planar_density::norms::{random_polygon, NormSpec, RandomPolygonSpec};
use planar_density::{NormDescriptor, Vec2};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Density,
    Marstrand,
    Decay,
    Barycenter,
    Monotonicity,
    Shear,
    Touching,
    Radial,
    Annuli,
    Pipeline,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Density => "density",
            Experiment::Marstrand => "marstrand",
            Experiment::Decay => "decay",
            Experiment::Barycenter => "barycenter",
            Experiment::Monotonicity => "monotonicity",
            Experiment::Shear => "shear",
            Experiment::Touching => "touching",
            Experiment::Radial => "radial",
            Experiment::Annuli => "annuli",
            Experiment::Pipeline => "pipeline",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub norms: Vec<NormEntry>,
    #[serde(default)]
    pub measures: Vec<MeasureEntry>,
    #[serde(default)]
    pub centers: Vec<Vec2>,
    #[serde(default)]
    pub radii: Option<RadiiGrid>,
    /// Radii for exponent fits.
    #[serde(default)]
    pub fit_radii: Option<RadiiGrid>,
    /// Exponent; defaults to each measure's nominal dimension.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directions `ν` (monotonicity) or line directions (shear).
    #[serde(default)]
    pub directions: Vec<DirectionEntry>,
    /// `σ` grid for the quantitative constants.
    #[serde(default)]
    pub sigmas: Vec<f64>,
    /// Ball radii `r` (decay) or `ρ` (barycenter).
    #[serde(default)]
    pub scales: Vec<f64>,
    /// Offsets `y/r`; points off the support are snapped to the nearest atom.
    #[serde(default)]
    pub offsets: Vec<Vec2>,
    #[serde(default)]
    pub uniformity: Option<UniformitySettings>,
    #[serde(default)]
    pub radial: Option<RadialSettings>,
    #[serde(default)]
    pub annuli: Option<AnnuliSettings>,
    #[serde(default)]
    pub touching: Option<TouchingSettings>,
    #[serde(default)]
    pub pipeline: Option<PipelineSettings>,
}

/// A norm: any serialized descriptor, or a seeded random polygon.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormEntry {
    Random(RandomNorm),
    Spec(NormSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RandomNorm {
    RandomPolygon { half_vertices: usize, seed: u64 },
}

impl NormEntry {
    pub fn build(&self) -> Result<(String, NormDescriptor)> {
        match self {
            NormEntry::Random(RandomNorm::RandomPolygon { half_vertices, seed }) => Ok((
                format!("random_polygon({half_vertices},{seed})"),
                random_polygon(RandomPolygonSpec::new(*half_vertices, *seed)),
            )),
            NormEntry::Spec(spec) => {
                let n = NormDescriptor::try_from(spec.clone())?;
                Ok((n.label(), n))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureEntry {
    pub name: String,
    pub generator: GeneratorSpec,
    /// Indices into `norms` this measure is paired with; all by default.
    #[serde(default)]
    pub norms: Option<Vec<usize>>,
    /// Overrides the top-level centers.
    #[serde(default)]
    pub centers: Option<Vec<Vec2>>,
    #[serde(default)]
    pub radii: Option<RadiiGrid>,
    #[serde(default)]
    pub fit_radii: Option<RadiiGrid>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Field-wise overrides of the top-level tolerances.
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub verdict: Option<Verdict>,
    #[serde(default)]
    pub density: Option<DensityTarget>,
    #[serde(default)]
    pub annuli_packing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    Oscillating,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converging => "converging",
            Verdict::Oscillating => "oscillating",
        }
    }
}

/// Expected density value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityTarget {
    /// Area of the norm's unit ball.
    UnitBallArea,
    /// `2/‖u‖` for a segment with direction `u`.
    SegmentLength { direction: Vec2 },
    Value(f64),
}

impl DensityTarget {
    pub fn value(&self, n: &NormDescriptor) -> f64 {
        match *self {
            DensityTarget::UnitBallArea => n.unit_ball_area(),
            DensityTarget::SegmentLength { direction } => 2.0 * direction.norm() / n.eval(direction),
            DensityTarget::Value(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error of every density value against the target.
    pub density_rel: Option<f64>,
    /// Largest oscillation of a converging profile (default 1.05).
    pub converging_max: Option<f64>,
    /// Smallest oscillation of an oscillating profile (default 1.3).
    pub oscillating_min: Option<f64>,
    /// `|α̂ − α|`.
    pub alpha_abs: Option<f64>,
    /// Largest decay ratio `|b|/‖y‖²`.
    pub decay_ratio_max: Option<f64>,
    /// `max |Ĉ(r)/median − 1|` across scales.
    pub c_hat_stability: Option<f64>,
    /// `|b(ρ)| ≤ barycenter_abs + barycenter_rel_mass·mass_scale`.
    pub barycenter_abs: Option<f64>,
    pub barycenter_rel_mass: Option<f64>,
    pub radial_gap: Option<f64>,
    /// Smallest `δ` of the two certified directions.
    pub delta_min: Option<f64>,
    /// `|A d − d|` for the shear's fixed line (default 1e-12).
    pub line_fixed: Option<f64>,
    /// Upper bound on the graph scan's Lipschitz estimate (default 1 + 1e-6).
    pub lipschitz_max: Option<f64>,
}

impl Tolerances {
    /// `self` with every field set in `over` replaced.
    pub fn merged(&self, over: Option<&Tolerances>) -> Tolerances {
        let Some(o) = over else { return *self };
        Tolerances {
            density_rel: o.density_rel.or(self.density_rel),
            converging_max: o.converging_max.or(self.converging_max),
            oscillating_min: o.oscillating_min.or(self.oscillating_min),
            alpha_abs: o.alpha_abs.or(self.alpha_abs),
            decay_ratio_max: o.decay_ratio_max.or(self.decay_ratio_max),
            c_hat_stability: o.c_hat_stability.or(self.c_hat_stability),
            barycenter_abs: o.barycenter_abs.or(self.barycenter_abs),
            barycenter_rel_mass: o.barycenter_rel_mass.or(self.barycenter_rel_mass),
            radial_gap: o.radial_gap.or(self.radial_gap),
            delta_min: o.delta_min.or(self.delta_min),
            line_fixed: o.line_fixed.or(self.line_fixed),
            lipschitz_max: o.lipschitz_max.or(self.lipschitz_max),
        }
    }
}

/// A list of radii or a generated grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiiGrid {
    List(Vec<f64>),
    Generated(RadiiSpec),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiiSpec {
    /// `count` radii log-spaced over `[min, max]`.
    Geometric { min: f64, max: f64, count: usize },
    /// `{b^-k, 2·b^-k}` for `k` in `k_min..=k_max`.
    Pairs { base: f64, k_min: i32, k_max: i32 },
}

impl RadiiGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut v = match self {
            RadiiGrid::List(v) => v.clone(),
            RadiiGrid::Generated(RadiiSpec::Geometric { min, max, count }) => {
                if !(*min > 0.0 && max > min && *count >= 2) {
                    bail!("geometric radii need 0 < min < max and count >= 2");
                }
                let step = (max / min).ln() / (*count - 1) as f64;
                (0..*count).map(|i| min * (step * i as f64).exp()).collect()
            }
            RadiiGrid::Generated(RadiiSpec::Pairs { base, k_min, k_max }) => {
                if !(*base > 2.0 && k_min <= k_max) {
                    bail!("radius pairs need base > 2 and k_min <= k_max");
                }
                (*k_min..=*k_max)
                    .flat_map(|k| {
                        let r = base.powi(-k);
                        [r, 2.0 * r]
                    })
                    .collect()
            }
        };
        v.sort_by(f64::total_cmp);
        Ok(v)
    }
}

/// A direction, optionally with the expected classification.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionEntry {
    Plain(Vec2),
    Checked(CheckedDirection),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckedDirection {
    pub nu: Vec2,
    #[serde(default)]
    pub expect: Option<planar_density::geometry::MonotonicityClass>,
    /// Expected `min_dot` with its tolerance.
    #[serde(default)]
    pub min_dot: Option<f64>,
    #[serde(default)]
    pub min_dot_tol: Option<f64>,
    /// Norm indices this entry applies to; all when absent.
    #[serde(default)]
    pub norms: Option<Vec<usize>>,
}

impl DirectionEntry {
    pub fn checked(&self) -> CheckedDirection {
        match self {
            DirectionEntry::Plain(nu) => CheckedDirection {
                nu: *nu,
                expect: None,
                min_dot: None,
                min_dot_tol: None,
                norms: None,
            },
            DirectionEntry::Checked(c) => c.clone(),
        }
    }

    pub fn applies_to(&self, norm: usize) -> bool {
        match self {
            DirectionEntry::Plain(_) => true,
            DirectionEntry::Checked(c) => c.norms.as_ref().is_none_or(|ids| ids.contains(&norm)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformitySettings {
    pub centers: usize,
    pub radii: RadiiGrid,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSettings {
    pub profile: RadialProfile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnuliSettings {
    pub counts: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelogramConfig {
    pub v: Vec2,
    pub w: Vec2,
    /// Both half-widths, or neither for unit sides.
    #[serde(default)]
    pub h_v: Option<f64>,
    #[serde(default)]
    pub h_w: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchVerdict {
    Edge,
    VertexOnly,
}

impl TouchVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            TouchVerdict::Edge => "edge",
            TouchVerdict::VertexOnly => "vertex_only",
        }
    }
}

/// Centers: an explicit list or a rectangular grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterGrid {
    List(Vec<Vec2>),
    Grid(GridSpec),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: Vec2,
    pub max: Vec2,
    pub nx: usize,
    pub ny: usize,
}

impl CenterGrid {
    pub fn points(&self) -> Vec<Vec2> {
        match self {
            CenterGrid::List(v) => v.clone(),
            CenterGrid::Grid(g) => {
                let at = |lo: f64, hi: f64, i: usize, k: usize| {
                    if k <= 1 {
                        0.5 * (lo + hi)
                    } else {
                        lo + (hi - lo) * i as f64 / (k - 1) as f64
                    }
                };
                let mut out = Vec::with_capacity(g.nx * g.ny);
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        out.push(Vec2::new(at(g.min.x, g.max.x, i, g.nx), at(g.min.y, g.max.y, j, g.ny)));
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    /// Center whose touch seeds the chart.
    pub seed_center: Vec2,
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TouchingSettings {
    pub parallelogram: ParallelogramConfig,
    pub centers: CenterGrid,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub expect: Option<TouchVerdict>,
    #[serde(default)]
    pub scan: Option<ScanSettings>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineStep {
    I,
    Ii,
    Iii,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSettings {
    pub step: PipelineStep,
    /// Touching centers for step iii, in the original frame.
    #[serde(default)]
    pub centers: Option<CenterGrid>,
    /// Replaces the parallelogram built from the norm.
    #[serde(default)]
    pub parallelogram: Option<ParallelogramConfig>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub scan: Option<ScanRange>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let mut v: serde_json::Value = serde_json::from_str(text)?;
    if let Some(ms) = v.get_mut("measures").and_then(|m| m.as_array_mut()) {
        for m in ms {
            if let Some(g) = m.get_mut("generator") {
                expand_random_norms(g)?;
            }
        }
    }
    Ok(serde_json::from_value(v)?)
}

/// Replaces `{"kind": "random_polygon", ..}` objects by the polygon they
/// draw, so generators can normalize against random norms.
fn expand_random_norms(v: &mut serde_json::Value) -> Result<()> {
    match v {
        serde_json::Value::Object(map) => {
            if map.get("kind").and_then(|k| k.as_str()) == Some("random_polygon") {
                let r: RandomNorm = serde_json::from_value(v.clone())?;
                let RandomNorm::RandomPolygon { half_vertices, seed } = r;
                let n = random_polygon(RandomPolygonSpec::new(half_vertices, seed));
                *v = serde_json::to_value(NormSpec::from(n))?;
            } else {
                for x in map.values_mut() {
                    expand_random_norms(x)?;
                }
            }
        }
        serde_json::Value::Array(xs) => {
            for x in xs {
                expand_random_norms(x)?;
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let err = parse(r#"{"experiment": "density", "colour": 3}"#).unwrap_err();
        assert!(format!("{err:#}").contains("colour"));
    }

    #[test]
    fn unknown_tolerance_is_rejected() {
        assert!(parse(r#"{"tolerances": {"density_rel": 0.01, "bogus": 1}}"#).is_err());
    }

    #[test]
    fn norms_parse_both_forms() {
        let cfg = parse(
            r#"{"norms": [{"kind": "lp", "p": "inf"}, {"kind": "random_polygon", "half_vertices": 6, "seed": 3},
                          {"kind": "euclidean"}]}"#,
        )
        .unwrap();
        let labels: Vec<String> = cfg.norms.iter().map(|n| n.build().unwrap().0).collect();
        assert_eq!(labels, ["lp(inf)", "random_polygon(6,3)", "euclidean"]);
    }

    #[test]
    fn random_norms_expand_inside_generators() {
        let cfg = parse(
            r#"{"measures": [{"name": "s", "generator": {"kind": "segment", "direction": [1, 0],
                "half_length": 1, "spacing": 0.01,
                "normalization": {"kind": "uniform", "norm": {"kind": "random_polygon", "half_vertices": 5, "seed": 9}}}}]}"#,
        )
        .unwrap();
        let expected = random_polygon(RandomPolygonSpec::new(5, 9));
        match &cfg.measures[0].generator {
            GeneratorSpec::Segment {
                normalization: planar_density::measures::Normalization::Uniform { norm },
                ..
            } => assert_eq!(norm.eval(Vec2::new(0.3, 0.7)), expected.eval(Vec2::new(0.3, 0.7))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn radius_pairs_are_sorted() {
        let g: RadiiGrid = serde_json::from_str(r#"{"kind": "pairs", "base": 3, "k_min": 1, "k_max": 2}"#).unwrap();
        let v = g.values().unwrap();
        assert_eq!(v, vec![1.0 / 9.0, 2.0 / 9.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn geometric_radii_hit_both_ends() {
        let g = RadiiGrid::Generated(RadiiSpec::Geometric {
            min: 0.01,
            max: 1.0,
            count: 5,
        });
        let v = g.values().unwrap();
        assert!((v[0] - 0.01).abs() < 1e-15 && (v[4] - 1.0).abs() < 1e-12);
        assert!((v[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn center_grid_is_row_major() {
        let g: CenterGrid =
            serde_json::from_str(r#"{"min": [0, 0], "max": [1, 2], "nx": 2, "ny": 3}"#).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], Vec2::new(1.0, 0.0));
        assert_eq!(p[2], Vec2::new(0.0, 1.0));
    }

    #[test]
    fn density_target_values() {
        let linf = NormDescriptor::lp(f64::INFINITY).unwrap();
        assert!((DensityTarget::UnitBallArea.value(&linf) - 4.0).abs() < 1e-12);
        let seg = DensityTarget::SegmentLength {
            direction: Vec2::new(1.0, 1.0),
        };
        assert!((seg.value(&linf) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn measure_tolerances_override_fieldwise() {
        let base = Tolerances {
            density_rel: Some(0.02),
            alpha_abs: Some(0.02),
            ..Default::default()
        };
        let over = Tolerances {
            alpha_abs: Some(0.1),
            ..Default::default()
        };
        let m = base.merged(Some(&over));
        assert_eq!(m.density_rel, Some(0.02));
        assert_eq!(m.alpha_abs, Some(0.1));
    }
}
