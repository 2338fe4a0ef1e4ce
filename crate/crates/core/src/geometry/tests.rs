use super::*;
use crate::linalg::LinearMap2;
use crate::norms::{random_polygon, PolygonNorm, RandomPolygonSpec};
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

fn linf() -> NormDescriptor {
    NormDescriptor::lp(f64::INFINITY).unwrap()
}

fn l1() -> NormDescriptor {
    NormDescriptor::lp(1.0).unwrap()
}

fn sheared_square() -> NormDescriptor {
    NormDescriptor::polygon(vec![
        Vec2::new(2.0, 1.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(-2.0, -1.0),
        Vec2::new(0.0, -1.0),
    ])
    .unwrap()
}

#[test]
fn cone_examples() {
    assert!(Cone::bilateral(Vec2::ZERO, Vec2::E1, 1.0).contains(Vec2::new(1.0, 0.5)));
    assert!(!Cone::directional(Vec2::ZERO, Vec2::E2, 1.0).contains(Vec2::new(0.5, -1.0)));
    assert!(Cone::bilateral(Vec2::new(1.0, 1.0), Vec2::E2, 0.0).contains(Vec2::new(1.0, 3.0)));
    assert!(Cone::bilateral(Vec2::ZERO, Vec2::E1, 0.5).contains(Vec2::new(-1.0, 0.5)));
    assert!(!Cone::directional(Vec2::ZERO, Vec2::E1, 0.5).contains(Vec2::new(-1.0, 0.5)));
}

#[test]
fn boundary_normal_examples() {
    let n = boundary_normal(&NormDescriptor::Euclidean, Vec2::E2).unwrap();
    assert_eq!(n, Vec2::E2);
    assert_eq!(boundary_normal(&linf(), Vec2::new(1.0, 0.3)).unwrap(), Vec2::E1);
    let n = boundary_normal(&l1(), Vec2::new(0.5, 0.5)).unwrap();
    assert!((n - Vec2::new(1.0, 1.0) / SQRT_2).norm() < 1e-15);
    assert!(matches!(
        boundary_normal(&l1(), Vec2::E1),
        Err(GeometryError::OnRay(_))
    ));
}

#[test]
fn classification_examples() {
    let p = MonotonicityParams::default();
    for t in [0.0, 0.4, 2.0, 4.0] {
        let r = classify_monotonicity(&NormDescriptor::Euclidean, Vec2::from_angle(t), &p).unwrap();
        assert_eq!(r.class, MonotonicityClass::Strict);
    }
    let r = classify_monotonicity(&linf(), Vec2::E2, &p).unwrap();
    assert_eq!(r.class, MonotonicityClass::Weak);
    assert!(r.min_dot.abs() <= 1e-9);
    assert!((r.witness.x.abs() - 1.0).abs() < 1e-12);

    let r = classify_monotonicity(&linf(), Vec2::new(1.0, -1.0), &p).unwrap();
    assert_eq!(r.class, MonotonicityClass::Strict);
    assert!((r.min_dot - FRAC_1_SQRT_2).abs() < 1e-6);

    let r = classify_monotonicity(&l1(), Vec2::E2, &p).unwrap();
    assert_eq!(r.class, MonotonicityClass::Strict);
    assert!((r.min_dot - FRAC_1_SQRT_2).abs() < 1e-6);

    // a sheared square has a direction with negative normals on one side
    let r = classify_monotonicity(&sheared_square(), Vec2::E2, &p).unwrap();
    assert_eq!(r.class, MonotonicityClass::None);
}

#[test]
fn classification_rejects_few_samples() {
    let p = MonotonicityParams {
        samples: 10,
        ..Default::default()
    };
    assert!(classify_monotonicity(&linf(), Vec2::E2, &p).is_err());
}

#[test]
fn quantitative_examples() {
    let q = quantitative_monotonicity(&NormDescriptor::Euclidean, Vec2::E2, &[1.0]).unwrap();
    assert!((q.delta - FRAC_1_SQRT_2).abs() <= 1e-9);
    let q = quantitative_monotonicity(&NormDescriptor::Euclidean, Vec2::E2, &[1e-4]).unwrap();
    assert!((q.delta - 1.0).abs() < 1e-7);
    let q = quantitative_monotonicity(&linf(), Vec2::E2, &[0.5]).unwrap();
    assert_eq!(q.delta, 1.0);
    // at sigma = 1 the cone reaches the corners, where e1 is a subgradient
    let q = quantitative_monotonicity(&linf(), Vec2::E2, &[0.5, 1.0]).unwrap();
    assert_eq!(q.sigma, 0.5);
    assert_eq!(q.table[1].delta, 0.0);
}

#[test]
fn quantitative_is_antitone() {
    let grid: Vec<f64> = (1..40).map(|k| k as f64 * 0.05).collect();
    for n in [
        NormDescriptor::Euclidean,
        linf(),
        l1(),
        NormDescriptor::lp(3.0).unwrap(),
        random_polygon(RandomPolygonSpec::new(8, 11)),
    ] {
        for t in [0.1, 1.0, 2.5] {
            let q = quantitative_monotonicity(&n, Vec2::from_angle(t), &grid).unwrap();
            for w in q.table.windows(2) {
                assert!(w[0].sigma < w[1].sigma && w[0].delta >= w[1].delta);
            }
        }
    }
}

#[test]
fn edge_arc_overlap() {
    // edge spanning the arc without any endpoint inside it
    assert!(edge_meets_arc(-0.5, 0.5, 0.0, 0.1));
    assert!(edge_meets_arc(6.0, 0.5, 0.0, 0.1));
    assert!(!edge_meets_arc(0.3, 0.5, 0.0, 0.1));
    assert!(edge_meets_arc(0.05, 0.5, 0.0, 0.1));
}

#[test]
fn two_strict_directions_examples() {
    let p = MonotonicityParams::default();
    let t = find_two_strict_directions(&NormDescriptor::Euclidean, &p).unwrap();
    assert!(t.degenerate);
    assert_eq!(t.map, LinearMap2::IDENTITY);
    assert!(t.nu1.dot(t.nu2).abs() < 1e-15);

    let t = find_two_strict_directions(&linf(), &p).unwrap();
    assert!(!t.degenerate);
    assert!(t.nu1.cross(t.nu2).abs() > 0.1);
    assert!(t.reports.iter().all(|r| r.class == MonotonicityClass::Strict));

    let hex = NormDescriptor::Polygon(PolygonNorm::regular(6, 0.0).unwrap());
    let t = find_two_strict_directions(&hex, &p).unwrap();
    assert!(t.reports.iter().all(|r| r.min_dot > 0.1), "{:?}", t.reports);
}

#[test]
fn two_strict_directions_recertify_with_more_samples() {
    let p = MonotonicityParams::default();
    let p2 = MonotonicityParams {
        samples: 2 * p.samples,
        ..p
    };
    for n in [
        linf(),
        l1(),
        NormDescriptor::lp(1.5).unwrap(),
        NormDescriptor::lp(4.0).unwrap(),
        random_polygon(RandomPolygonSpec::new(6, 5)),
    ] {
        let t = find_two_strict_directions(&n, &p).unwrap();
        let img = t.transformed_norm(&n);
        for nu in [t.nu1, t.nu2] {
            let r = classify_monotonicity(&img, nu, &p2).unwrap();
            assert_eq!(r.class, MonotonicityClass::Strict, "{}", n.label());
        }
    }
}

#[test]
fn strict_directions_bound_sampled_dots_by_delta() {
    let p = MonotonicityParams::default();
    for seed in 0..5 {
        let n = random_polygon(RandomPolygonSpec::new(7, seed));
        let t = find_two_strict_directions(&n, &p).unwrap();
        let img = t.transformed_norm(&n);
        for (rep, nu) in t.reports.iter().zip([t.nu1, t.nu2]) {
            for theta in angular_grid(4096) {
                let x = img.boundary_point(Vec2::from_angle(theta));
                if x.dot(nu) <= 1e-3 || img.is_on_ray(x) {
                    continue;
                }
                let nx = boundary_normal(&img, x).unwrap();
                assert!(nx.dot(nu) >= rep.min_dot - 1e-9);
            }
        }
    }
}

#[test]
fn shear_examples() {
    let p = MonotonicityParams::default();
    let s = shear_for_weak_monotonicity(&linf(), Vec2::E1, &p).unwrap();
    assert!(s.map.max_abs_diff(&LinearMap2::new(1.0, 0.0, 0.0, -1.0).unwrap()) < 1e-15);
    assert!(s.report.class.at_least_weak());

    let s = shear_for_weak_monotonicity(&sheared_square(), Vec2::E1, &p).unwrap();
    let want = LinearMap2::new(1.0, -1.0, 0.0, -1.0).unwrap();
    assert!(s.map.max_abs_diff(&want) <= 1e-12);
    let img = sheared_square().as_polygon().unwrap().transformed(&s.map).unwrap();
    for v in img.vertices() {
        assert!((v.x.abs() - 1.0).abs() <= 1e-12 && (v.y.abs() - 1.0).abs() <= 1e-12);
    }
    assert_eq!(s.report.class, MonotonicityClass::Weak);

    for t in [0.0, 0.7, 2.0] {
        let s = shear_for_weak_monotonicity(&NormDescriptor::Euclidean, Vec2::from_angle(t), &p).unwrap();
        // the reflection across the line: identity on it, minus identity across it
        let d = Vec2::from_angle(t);
        assert!((s.map.apply(d) - d).norm() < 1e-12);
        assert!((s.map.apply(d.perp()) + d.perp()).norm() < 1e-12);
    }
}

#[test]
fn shear_fixes_the_line() {
    let p = MonotonicityParams::default();
    for seed in 0..6 {
        let n = random_polygon(RandomPolygonSpec::new(6, 100 + seed));
        let d = Vec2::from_angle(0.37 * seed as f64 + 0.1);
        let s = shear_for_weak_monotonicity(&n, d, &p).unwrap();
        for k in 0..100 {
            let q = d * (k as f64 - 50.0) * 0.1;
            let aq = s.map.apply(q);
            assert!(aq.cross(d).abs() <= 1e-12 * (1.0 + q.norm()));
        }
        assert!(s.report.min_dot >= -1e-9);
    }
}

#[test]
fn csv_row_format() {
    let r = MonotonicityReport {
        nu: Vec2::E2,
        class: MonotonicityClass::Weak,
        min_dot: 0.0,
        witness: Vec2::new(1.0, 0.5),
    };
    let mut buf = Vec::new();
    write_monotonicity_csv(&mut buf, &[r]).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "nu_x,nu_y,class,min_dot,witness_x,witness_y\n0,1,weak,0,1,0.5\n"
    );
}

proptest! {
    #[test]
    fn cone_membership_is_scale_invariant(
        ax in -3.0..3.0f64, ay in -3.0..3.0f64, t in 0.0..6.3f64, m in 0.0..3.0f64,
        yx in -5.0..5.0f64, yy in -5.0..5.0f64, lam in 0.0..10.0f64, directional: bool,
    ) {
        let apex = Vec2::new(ax, ay);
        let c = if directional {
            Cone::directional(apex, Vec2::from_angle(t), m)
        } else {
            Cone::bilateral(apex, Vec2::from_angle(t), m)
        };
        prop_assert!(c.contains(apex));
        let y = Vec2::new(yx, yy);
        // stay away from the boundary where rounding decides
        let (perp, along) = c.components(y);
        prop_assume!((perp - m * along.abs()).abs() > 1e-9 * (1.0 + perp));
        let scaled = apex + (y - apex) * lam;
        if lam > 0.0 {
            prop_assert_eq!(c.contains(y), c.contains(scaled));
        }
    }
}
