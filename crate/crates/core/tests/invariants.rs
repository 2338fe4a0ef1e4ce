use planar_density::measures::{gen_lebesgue, read_pmsr, write_pmsr, Normalization, PointMeasure, Rect, Sampling};
use planar_density::norms::{random_polygon, RandomPolygonSpec};
use planar_density::touching::{touching_radius, touching_radius_brute_force, ParallelogramSpec};
use planar_density::{LinearMap2, NormDescriptor, Vec2};
use proptest::prelude::*;

fn norm_from(kind: u8, seed: u64) -> NormDescriptor {
    match kind % 4 {
        0 => NormDescriptor::lp(2.0).unwrap(),
        1 => NormDescriptor::lp(f64::INFINITY).unwrap(),
        2 => NormDescriptor::lp(1.0 + (seed % 7) as f64 * 0.5).unwrap(),
        _ => random_polygon(RandomPolygonSpec::new(3 + (seed % 5) as usize, seed)),
    }
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn cloud(seed: u64) -> PointMeasure {
    gen_lebesgue(Rect::centered(1.0), 400, seed, Sampling::Iid, &Normalization::Raw).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_axioms(kind in any::<u8>(), seed in 0u64..1000, x in vec2(), y in vec2(), t in -4.0..4.0f64) {
        let n = norm_from(kind, seed);
        let scale = 1.0 + x.norm() + y.norm();
        prop_assert!(n.eval(x) >= 0.0);
        prop_assert!((n.eval(x * t) - t.abs() * n.eval(x)).abs() <= 1e-9 * scale);
        prop_assert!(n.eval(x + y) <= n.eval(x) + n.eval(y) + 1e-9 * scale);
        prop_assert!((n.eval(-x) - n.eval(x)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn boundary_point_has_unit_norm(kind in any::<u8>(), seed in 0u64..1000, theta in 0.0..std::f64::consts::TAU) {
        let n = norm_from(kind, seed);
        let b = n.boundary_point(Vec2::new(theta.cos(), theta.sin()));
        prop_assert!((n.eval(b) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn indexed_ball_mass_matches_scan(kind in any::<u8>(), seed in 0u64..200, x in vec2(), r in 0.0..3.0f64) {
        let n = norm_from(kind, seed);
        let mu = cloud(seed);
        let x = x * 0.3;
        let scanned: f64 = mu
            .points()
            .iter()
            .zip(mu.weights())
            .filter(|(p, _)| n.eval(**p - x) <= r)
            .map(|(_, w)| *w)
            .sum();
        prop_assert!((mu.ball_mass(&n, x, r) - scanned).abs() <= 1e-12 * mu.total_mass());
    }

    #[test]
    fn ball_mass_is_monotone_in_radius(seed in 0u64..200, x in vec2(), r in 0.0..2.0f64, dr in 0.0..1.0f64) {
        let n = norm_from(seed as u8, seed);
        let mu = cloud(seed);
        prop_assert!(mu.ball_mass(&n, x * 0.2, r) <= mu.ball_mass(&n, x * 0.2, r + dr));
    }

    #[test]
    fn push_forward_keeps_mass_and_maps_points(seed in 0u64..100, a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64) {
        let map = LinearMap2::new(1.0 + a.abs(), b, c, 1.0 + a.abs() + b.abs() * c.abs() + 0.5).unwrap();
        let mu = cloud(seed);
        let img = mu.push_forward(&map);
        let summed: f64 = img.weights().iter().sum();
        prop_assert!((summed - mu.total_mass()).abs() < 1e-12);
        for (p, q) in mu.points().iter().zip(img.points()).take(20) {
            let want = Vec2::new(1.0 + a.abs(), b).dot(*p);
            prop_assert!((q.x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn touching_radius_agrees_with_brute_force(seed in 0u64..100, vx in 0.2..2.0f64, wy in 0.2..2.0f64, x in vec2()) {
        let p = ParallelogramSpec::unit_sides(Vec2::new(vx, 0.3), Vec2::new(-0.4, wy)).unwrap();
        let mu = cloud(seed);
        let x = x * 0.5;
        let fast = touching_radius(&p, x, &mu).unwrap();
        let slow = touching_radius_brute_force(&p, x, mu.points()).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow));
    }
}

#[test]
fn pmsr_round_trips_through_a_file() {
    let mu = cloud(5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pmsr");
    write_pmsr(std::fs::File::create(&path).unwrap(), &mu).unwrap();
    let back = read_pmsr(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.points(), mu.points());
    assert_eq!(back.weights(), mu.weights());
}
