use super::*;
use crate::norms::{random_polygon, RandomPolygonSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linf() -> NormDescriptor {
    NormDescriptor::lp(f64::INFINITY).unwrap()
}

fn three_atoms() -> PointMeasure {
    PointMeasure::from_points(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(3.0, 0.0)]).unwrap()
}

#[test]
fn ball_mass_examples() {
    let m = three_atoms();
    assert_eq!(m.ball_mass(&NormDescriptor::Euclidean, Vec2::ZERO, 1.0), 2.0);
    assert_eq!(m.ball_mass(&linf(), Vec2::new(0.5, 0.0), 0.5), 2.0);
    let fc = gen_ifs(&four_corner(1.0 / 3.0, 8)).unwrap();
    assert_eq!(fc.ball_mass(&linf(), Vec2::ZERO, 1.0 / 9.0), 0.0625);
}

#[test]
fn four_corner_cylinder_oracle() {
    let depth = 7;
    let fc = gen_ifs(&four_corner(1.0 / 3.0, depth)).unwrap();
    assert_eq!(fc.len(), 4usize.pow(depth));
    for j in 0..depth as i32 {
        let r = 3f64.powi(-j);
        assert_eq!(fc.ball_mass(&linf(), Vec2::ZERO, r), 4f64.powi(-j));
        assert_eq!(fc.ball_mass(&linf(), Vec2::ZERO, 2.0 * r), 4f64.powi(-j).min(1.0));
    }
}

#[test]
fn ifs_examples() {
    let fc = gen_ifs(&four_corner(1.0 / 3.0, 2)).unwrap();
    assert_eq!(fc.len(), 16);
    assert!(fc.weights().iter().all(|&w| w == 1.0 / 16.0));
    let c = gen_ifs(&cantor(1.0 / 3.0, 10)).unwrap();
    assert!(c.points().iter().all(|p| p.y == 0.0));
    assert!((c.total_mass() - 1.0).abs() < 1e-12);
    let d = four_corner(1.0 / 3.0, 1).similarity_dimension().unwrap();
    assert!((d - 4f64.ln() / 3f64.ln()).abs() < 1e-15);
}

#[test]
fn ifs_rejects_bad_specs() {
    assert!(matches!(
        gen_ifs(&four_corner(1.0 / 3.0, 13)),
        Err(MeasureError::AtomBudget { .. })
    ));
    let mut s = four_corner(1.0 / 3.0, 2);
    s.maps[0].scale = 1.0;
    assert!(gen_ifs(&s).is_err());
    let mut s = four_corner(1.0 / 3.0, 2);
    s.probabilities = Some(vec![0.5, 0.5, 0.5, -0.5]);
    assert!(gen_ifs(&s).is_err());
}

#[test]
fn lebesgue_examples() {
    let m = gen_lebesgue(Rect::unit(), 4, 1, Sampling::Stratified, &Normalization::Raw).unwrap();
    assert_eq!(m.len(), 4);
    assert!((m.total_mass() - 1.0).abs() < 1e-15);
    let r = Rect::new(Vec2::ZERO, Vec2::new(2.0, 1.0));
    for n in [1, 7, 1000] {
        for s in [Sampling::Stratified, Sampling::Iid] {
            let m = gen_lebesgue(r, n, 3, s, &Normalization::Raw).unwrap();
            assert!((m.total_mass() - 2.0).abs() < 1e-12);
        }
    }
    let m = gen_lebesgue(Rect::unit(), 1_000_000, 2, Sampling::Iid, &Normalization::Raw).unwrap();
    let ratio = m.ball_mass(&NormDescriptor::Euclidean, Vec2::new(0.5, 0.5), 0.25) / (PI * 0.0625);
    assert!((0.99..=1.01).contains(&ratio), "{ratio}");
    assert!(gen_lebesgue(Rect::new(Vec2::ZERO, Vec2::new(1.0, 0.0)), 4, 1, Sampling::Iid, &Normalization::Raw).is_err());
}

use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[test]
fn segment_examples() {
    let l2 = NormDescriptor::lp(2.0).unwrap();
    let m = gen_hausdorff1_segment(Vec2::E1, 10.0, 0.001, &Normalization::Uniform { norm: l2.clone() }).unwrap();
    assert!((m.ball_mass(&l2, Vec2::ZERO, 1.0) - 1.0).abs() <= 0.002);
    let m = gen_hausdorff1_segment(Vec2::E1, 10.0, 0.001, &Normalization::Raw).unwrap();
    assert!((m.ball_mass(&NormDescriptor::Euclidean, Vec2::ZERO, 1.0) - 2.0).abs() <= 0.002);
    let u = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let m = gen_hausdorff1_segment(u, 10.0, 0.001, &Normalization::Uniform { norm: linf() }).unwrap();
    assert!((m.ball_mass(&linf(), Vec2::ZERO, 0.5) - 0.5).abs() <= 0.002);
    assert!(gen_hausdorff1_segment(Vec2::E1, 1.0, 0.2, &Normalization::Raw).is_err());
}

#[test]
fn polyline_length_measure() {
    let v = [Vec2::new(-1.0, -1.0), Vec2::ZERO, Vec2::new(1.0, -1.0)];
    let m = gen_polyline(&v, 0.01).unwrap();
    assert!((m.total_mass() - 2.0 * 2f64.sqrt()).abs() < 0.011);
    assert_eq!(m.points()[0], v[0]);
    assert_eq!(*m.points().last().unwrap(), v[2]);
    assert!(m.points().contains(&Vec2::ZERO));
    // a wedge arm at slope one, seen from its apex
    let mass = m.ball_mass(&NormDescriptor::Euclidean, Vec2::ZERO, 0.5);
    assert!((mass - 1.0).abs() < 0.02);
    let s: GeneratorSpec =
        serde_json::from_str(r#"{"kind":"polyline","vertices":[[0,0],[1,0]],"spacing":0.25}"#).unwrap();
    assert_eq!(s.generate(0).unwrap().len(), 5);
    assert_eq!(s.nominal_dimension(), Some(1.0));
    assert!(gen_polyline(&v[..1], 0.1).is_err());
    assert!(gen_polyline(&[Vec2::ZERO, Vec2::ZERO], 0.1).is_err());
}

#[test]
fn push_forward_examples() {
    let m = three_atoms();
    assert_eq!(m.push_forward(&LinearMap2::IDENTITY), m);
    let one = PointMeasure::from_points(vec![Vec2::E1]).unwrap();
    let img = one.push_forward(&LinearMap2::diag(2.0, 2.0).unwrap());
    assert_eq!(img.points(), &[Vec2::new(2.0, 0.0)]);
    assert_eq!(img.total_mass(), 1.0);
    let seg = gen_hausdorff1_segment(Vec2::E1, 1.0, 0.01, &Normalization::Raw).unwrap();
    let img = seg.push_forward(&LinearMap2::new(1.0, -1.0, 0.0, -1.0).unwrap());
    assert_eq!(img, seg);
}

#[test]
fn push_forward_ball_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = gen_lebesgue(Rect::unit(), 3000, 9, Sampling::Iid, &Normalization::Raw).unwrap();
    for seed in 0..10 {
        let a = LinearMap2::new(
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
        )
        .unwrap();
        let n = random_polygon(RandomPolygonSpec::new(5, seed));
        let img = m.push_forward(&a);
        let pulled = NormDescriptor::linear_image(a.inverse(), n.clone());
        for _ in 0..20 {
            let x = Vec2::new(rng.gen(), rng.gen());
            let r = rng.gen_range(0.01..0.5);
            assert_eq!(img.ball_mass(&n, a.apply(x), r), m.ball_mass(&pulled, x, r));
        }
    }
}

#[test]
fn blow_up_examples() {
    let m = three_atoms();
    let b = m.blow_up(&NormDescriptor::Euclidean, Vec2::ZERO, 1.0, 1.7, 10.0).unwrap();
    assert_eq!(b, m);
    let one = PointMeasure::from_points(vec![Vec2::new(2.0, 0.0)]).unwrap();
    let b = one.blow_up(&NormDescriptor::Euclidean, Vec2::ZERO, 2.0, 1.0, 2.0).unwrap();
    assert_eq!(b.points(), &[Vec2::E1]);
    assert_eq!(b.weights(), &[0.5]);
    let empty = one.blow_up(&NormDescriptor::Euclidean, Vec2::new(-5.0, 0.0), 1.0, 1.0, 1.0).unwrap();
    assert!(empty.is_empty());
    assert!(b.provenance().notes.iter().any(|s| s.contains("not certified")));
}

#[test]
fn blow_up_self_similarity_of_four_corner() {
    let d = 4f64.ln() / 3f64.ln();
    let fc = gen_ifs(&four_corner(1.0 / 3.0, 8)).unwrap();
    let coarse = gen_ifs(&four_corner(1.0 / 3.0, 7)).unwrap();
    let b = fc.blow_up(&linf(), Vec2::ZERO, 1.0 / 3.0, d, 1.0).unwrap();
    assert_eq!(b.len(), coarse.len());
    for k in 0..=20 {
        let r = 0.0123 * 70f64.powf(k as f64 / 20.0);
        let a = coarse.ball_mass(&linf(), Vec2::new(0.01, -0.02), r);
        let c = b.ball_mass(&linf(), Vec2::new(0.01, -0.02), r);
        assert!((a - c).abs() <= 1e-12, "r = {r}: {a} vs {c}");
    }
}

#[test]
fn blow_up_composition() {
    let m = gen_lebesgue(Rect::unit(), 5000, 3, Sampling::Iid, &Normalization::Raw).unwrap();
    let n = NormDescriptor::lp(1.0).unwrap();
    let x = Vec2::new(0.4, 0.6);
    let (r, s, alpha) = (0.5, 0.3, 1.3);
    let once = m.blow_up(&n, x, r * s, alpha, 1.0).unwrap();
    let twice = m
        .blow_up(&n, x, r, alpha, 2.0)
        .unwrap()
        .blow_up(&n, Vec2::ZERO, s, alpha, 1.0)
        .unwrap();
    assert_eq!(once.len(), twice.len());
    for i in 0..once.len() {
        assert!((once.points()[i] - twice.points()[i]).norm() <= 1e-12 * (1.0 + once.points()[i].norm()));
        assert!((once.weights()[i] - twice.weights()[i]).abs() <= 1e-12 * once.weights()[i]);
    }
}

#[test]
fn generators_are_deterministic() {
    let a = gen_lebesgue(Rect::unit(), 1000, 5, Sampling::Iid, &Normalization::Raw).unwrap();
    let b = gen_lebesgue(Rect::unit(), 1000, 5, Sampling::Iid, &Normalization::Raw).unwrap();
    assert_eq!(a, b);
    let c = gen_lebesgue(Rect::unit(), 1000, 6, Sampling::Iid, &Normalization::Raw).unwrap();
    assert_ne!(a, c);
}

#[test]
fn trusted_window_uses_resolution() {
    let m = gen_lebesgue(Rect::unit(), 10_000, 1, Sampling::Stratified, &Normalization::Raw).unwrap();
    let (lo, hi) = m.trusted_window();
    assert!((lo - 0.1).abs() < 1e-12);
    assert!(hi > 0.35 && hi < 0.36);
    let fc = gen_ifs(&four_corner(1.0 / 3.0, 10)).unwrap();
    assert!(fc.trusted_window().0 < 3f64.powi(-6));
}

#[test]
fn nearest_distance_matches_scan() {
    let m = gen_lebesgue(Rect::unit(), 2000, 8, Sampling::Iid, &Normalization::Raw).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x = Vec2::new(rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0));
        let want = m.points().iter().map(|p| (*p - x).norm()).fold(f64::INFINITY, f64::min);
        assert_eq!(m.nearest_distance(x), want);
    }
}

#[test]
fn file_round_trips() {
    let m = gen_ifs(&four_corner(1.0 / 3.0, 3)).unwrap();
    let mut buf = Vec::new();
    write_pmsr(&mut buf, &m).unwrap();
    assert_eq!(&buf[..5], b"PMSR1");
    assert_eq!(u64::from_le_bytes(buf[5..13].try_into().unwrap()), 64);
    let back = read_pmsr(&buf[..]).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.provenance(), m.provenance());
    assert!(read_pmsr(&b"PMSR2xxxxxxxx"[..]).is_err());

    let mut csv = Vec::new();
    write_csv(&mut csv, &m).unwrap();
    let back = read_csv(&csv[..]).unwrap();
    assert_eq!(back, m);
    assert!(read_csv(&b"x,y,w\n1,2\n"[..]).is_err());
    assert!(read_csv(&b"1,2,-1\n"[..]).is_err());
}

#[test]
fn generator_spec_json() {
    let s: GeneratorSpec = serde_json::from_str(
        r#"{"kind":"lebesgue","region":{"min":[0,0],"max":[1,1]},"samples":100,
            "normalization":{"kind":"uniform","norm":{"kind":"lp","p":"inf"}}}"#,
    )
    .unwrap();
    let m = s.generate(1).unwrap();
    assert!((m.total_mass() - 0.25).abs() < 1e-12);
    let s: GeneratorSpec = serde_json::from_str(r#"{"kind":"four_corner","lambda":0.3333333333333333,"depth":2}"#).unwrap();
    assert_eq!(s.generate(0).unwrap().len(), 16);
    assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind":"cantor","lambda":0.3,"depth":2,"extra":1}"#).is_err());
}

#[test]
fn ball_mass_brute_force_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let norms = [
        NormDescriptor::Euclidean,
        NormDescriptor::lp(1.0).unwrap(),
        linf(),
        NormDescriptor::lp(3.0).unwrap(),
        random_polygon(RandomPolygonSpec::new(9, 2)),
    ];
    for trial in 0..20 {
        let n_atoms = rng.gen_range(1..3000);
        let pts: Vec<Vec2> = (0..n_atoms)
            .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.3)))
            .collect();
        let w: Vec<f64> = (0..n_atoms).map(|_| rng.gen_range(0.01..1.0)).collect();
        let m = PointMeasure::new(pts, w, Provenance::new("test", serde_json::Value::Null, None, 0.0)).unwrap();
        let n = &norms[trial % norms.len()];
        for _ in 0..20 {
            let x = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..0.5));
            let r = rng.gen_range(0.0..1.0);
            assert_eq!(m.ball_mass(n, x, r), m.ball_mass_brute_force(n, x, r));
        }
    }
}

proptest! {
    #[test]
    fn ball_mass_monotone_in_radius(seed in 0u64..1000, x in -1.0..2.0f64, y in -1.0..2.0f64) {
        let m = gen_lebesgue(Rect::unit(), 500, seed, Sampling::Iid, &Normalization::Raw).unwrap();
        let n = random_polygon(RandomPolygonSpec::new(5, seed));
        let radii: Vec<f64> = (0..30).map(|k| 0.05 * k as f64).collect();
        let prof = m.ball_mass_profile(&n, Vec2::new(x, y), &radii);
        for w in prof.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (r, v) in radii.iter().zip(&prof) {
            prop_assert_eq!(*v, m.ball_mass(&n, Vec2::new(x, y), *r));
        }
    }

    #[test]
    fn push_forward_preserves_mass(seed in 0u64..100, a in 0.2..3.0f64, b in -2.0..2.0f64) {
        let m = gen_lebesgue(Rect::unit(), 300, seed, Sampling::Iid, &Normalization::Raw).unwrap();
        let img = m.push_forward(&LinearMap2::new(a, b, 0.1, 1.0).unwrap());
        prop_assert_eq!(img.total_mass(), m.total_mass());
    }
}
