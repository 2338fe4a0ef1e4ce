use super::*;
use proptest::prelude::*;
use std::f64::consts::SQRT_2;

fn square() -> NormDescriptor {
    NormDescriptor::polygon(vec![
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
        Vec2::new(-1.0, -1.0),
        Vec2::new(1.0, -1.0),
    ])
    .unwrap()
}

fn fleet() -> Vec<NormDescriptor> {
    let shear = LinearMap2::new(1.0, 0.5, -0.2, 1.3).unwrap();
    vec![
        NormDescriptor::Euclidean,
        NormDescriptor::lp(1.0).unwrap(),
        NormDescriptor::lp(1.5).unwrap(),
        NormDescriptor::lp(4.0).unwrap(),
        NormDescriptor::lp(f64::INFINITY).unwrap(),
        square(),
        NormDescriptor::Polygon(PolygonNorm::regular(6, 0.3).unwrap()),
        NormDescriptor::linear_image(shear, NormDescriptor::lp(1.0).unwrap()),
        NormDescriptor::linear_image(shear, NormDescriptor::lp(3.0).unwrap()),
        NormDescriptor::linear_image(LinearMap2::diag(1.0, -2.0).unwrap(), square()),
        random_polygon(RandomPolygonSpec::new(7, 3)),
    ]
}

fn seg(s: Subdifferential) -> SubdifferentialSegment {
    s.segment().expect("nonzero point")
}

#[test]
fn eval_examples() {
    assert_eq!(NormDescriptor::Euclidean.eval(Vec2::new(3.0, 4.0)), 5.0);
    assert_eq!(NormDescriptor::lp(f64::INFINITY).unwrap().eval(Vec2::new(1.0, -1.0)), 1.0);
    assert_eq!(square().eval(Vec2::new(0.5, 0.25)), 0.5);
    assert!(NormDescriptor::lp(0.5).is_err());
    assert!(NormDescriptor::lp(f64::NAN).is_err());
}

#[test]
fn subdifferential_examples() {
    let s = seg(NormDescriptor::lp(1.0).unwrap().subdifferential(Vec2::new(1.0, 0.0)));
    assert_eq!((s.v_minus, s.v_plus), (Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0)));
    assert!(!s.degenerate);

    let s = seg(NormDescriptor::Euclidean.subdifferential(Vec2::new(0.0, 2.0)));
    assert!(s.degenerate);
    assert_eq!(s.v_plus, Vec2::new(0.0, 1.0));

    let s = seg(square().subdifferential(Vec2::new(1.0, 0.0)));
    assert!(s.degenerate);
    assert_eq!(s.v_plus, Vec2::new(1.0, 0.0));

    assert_eq!(NormDescriptor::Euclidean.subdifferential(Vec2::ZERO), Subdifferential::Origin);
}

#[test]
fn vertex_subdifferentials_agree_across_representations() {
    let linf = NormDescriptor::lp(f64::INFINITY).unwrap();
    let sq = square();
    for x in [Vec2::new(2.0, 2.0), Vec2::new(-1.0, 1.0), Vec2::new(-3.0, -3.0), Vec2::new(1.0, -1.0)] {
        assert_eq!(linf.subdifferential(x), sq.subdifferential(x));
    }
    let l1 = NormDescriptor::lp(1.0).unwrap();
    let diamond = l1.as_polygon().map(NormDescriptor::Polygon).unwrap();
    for x in [Vec2::E1, Vec2::E2, -Vec2::E1, -Vec2::E2 * 4.0] {
        assert_eq!(l1.subdifferential(x), diamond.subdifferential(x));
    }
}

#[test]
fn gradient_examples() {
    let g = |n: &NormDescriptor, x| n.grad_norm_sq(x, RayPolicy::Error).unwrap().value;
    assert_eq!(g(&NormDescriptor::Euclidean, Vec2::new(1.0, 2.0)), Vec2::new(2.0, 4.0));
    assert_eq!(g(&NormDescriptor::lp(1.0).unwrap(), Vec2::new(1.0, 2.0)), Vec2::new(6.0, 6.0));
    assert_eq!(
        g(&NormDescriptor::lp(f64::INFINITY).unwrap(), Vec2::new(2.0, 1.0)),
        Vec2::new(4.0, 0.0)
    );
    assert_eq!(g(&NormDescriptor::Euclidean, Vec2::ZERO), Vec2::ZERO);
}

#[test]
fn ray_policy() {
    let l1 = NormDescriptor::lp(1.0).unwrap();
    let x = Vec2::new(2.0, 0.0);
    assert_eq!(l1.grad_norm_sq(x, RayPolicy::Error), Err(NormError::OnRay(x)));
    let g = l1.grad_norm_sq(x, RayPolicy::Midpoint).unwrap();
    assert!(g.on_ray);
    assert_eq!(g.value, Vec2::new(4.0, 0.0));
}

#[test]
fn polarization_examples() {
    let e = NormDescriptor::Euclidean;
    assert!(e.polarization(Vec2::E1, Vec2::E2).abs() < 1e-15);
    let z = Vec2::new(0.3, -1.7);
    for n in fleet() {
        let nz = n.eval(z);
        assert!((n.polarization(z, z) - nz * nz).abs() <= 1e-14 * nz * nz);
    }
    let linf = NormDescriptor::lp(f64::INFINITY).unwrap();
    assert_eq!(linf.polarization(Vec2::E1, Vec2::E2), 0.5);
}

#[test]
fn taylor_remainder_examples() {
    let e = NormDescriptor::Euclidean;
    assert!((e.taylor_remainder(Vec2::E1, Vec2::E2, RayPolicy::Error).unwrap() - 1.0).abs() < 1e-15);
    for n in fleet() {
        let z = Vec2::new(0.7, 0.2);
        assert_eq!(n.taylor_remainder(z, Vec2::ZERO, RayPolicy::Midpoint).unwrap(), 0.0);
    }
    // along e₁ the ℓ∞ norm is locally linear, so Δ/‖y‖ shrinks with y
    let linf = NormDescriptor::lp(f64::INFINITY).unwrap();
    let mut prev = f64::INFINITY;
    for t in [1e-2, 1e-3, 1e-4] {
        let y = Vec2::new(t, 0.0);
        let r = linf.taylor_remainder(Vec2::E1, y, RayPolicy::Error).unwrap() / t;
        assert!(r.abs() < prev);
        prev = r.abs().max(1e-300);
    }
}

#[test]
fn ray_examples() {
    assert!(NormDescriptor::Euclidean.non_differentiability_rays().is_empty());
    assert!(NormDescriptor::lp(3.0).unwrap().non_differentiability_rays().is_empty());
    let l1 = NormDescriptor::lp(1.0).unwrap().non_differentiability_rays();
    assert_eq!(l1, vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]);
    let sq = square().non_differentiability_rays();
    let want = [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4];
    for (a, b) in sq.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn linear_image_rays_follow_the_map() {
    let a = LinearMap2::new(1.0, 0.5, -0.2, 1.3).unwrap();
    let n = NormDescriptor::linear_image(a, NormDescriptor::lp(1.0).unwrap());
    for t in n.non_differentiability_rays() {
        let x = Vec2::from_angle(t) * 2.5;
        assert!(n.is_on_ray(x));
        assert!(!n.is_on_ray(Vec2::from_angle(t + 1e-6)));
    }
    assert_eq!(n.non_differentiability_rays().len(), 4);
}

#[test]
fn unit_ball_areas() {
    let cases = [
        (NormDescriptor::lp(1.0).unwrap(), 2.0),
        (NormDescriptor::Euclidean, PI),
        (NormDescriptor::lp(2.0).unwrap(), PI),
        (NormDescriptor::lp(f64::INFINITY).unwrap(), 4.0),
        (square(), 4.0),
    ];
    for (n, a) in cases {
        assert!((n.unit_ball_area() - a).abs() < 1e-12, "{}", n.label());
    }
}

#[test]
fn radius_bounds_bracket_the_sphere() {
    for n in fleet() {
        let (lo, hi) = (n.inradius(), n.circumradius());
        for t in angular_grid(2000) {
            let r = n.boundary_point(Vec2::from_angle(t)).norm();
            assert!(r <= hi * (1.0 + 1e-12) && r >= lo * (1.0 - 1e-12), "{}", n.label());
        }
    }
}

#[test]
fn json_round_trip() {
    for n in fleet() {
        let s = serde_json::to_string(&n).unwrap();
        let back: NormDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n, "{s}");
    }
    let n: NormDescriptor = serde_json::from_str(r#"{"kind":"lp","p":"inf"}"#).unwrap();
    assert_eq!(n, NormDescriptor::lp(f64::INFINITY).unwrap());
    let n: NormDescriptor = serde_json::from_str(r#"{"kind":"lp","p":1.5}"#).unwrap();
    assert_eq!(n.eval(Vec2::new(1.0, 0.0)), 1.0);
    // half-chain gets closed on load
    let n: NormDescriptor =
        serde_json::from_str(r#"{"kind":"polygon","vertices":[[1,0],[0,1]]}"#).unwrap();
    assert_eq!(n.eval(Vec2::new(0.5, 0.5)), 1.0);
    let n: NormDescriptor = serde_json::from_str(
        r#"{"kind":"linear_image","map":[[2,0],[0,1]],"inner":{"kind":"euclidean"}}"#,
    )
    .unwrap();
    assert_eq!(n.eval(Vec2::new(2.0, 0.0)), 1.0);
    assert!(serde_json::from_str::<NormDescriptor>(r#"{"kind":"lp","p":0.5}"#).is_err());
    assert!(serde_json::from_str::<NormDescriptor>(r#"{"kind":"euclidean","x":1}"#).is_err());
}

fn point() -> impl Strategy<Value = Vec2> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn norm_index() -> impl Strategy<Value = usize> {
    0..fleet().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn homogeneity_and_symmetry(i in norm_index(), x in point(), lam in 0.0..10.0f64) {
        let n = &fleet()[i];
        let nx = n.eval(x);
        prop_assert!((n.eval(x * lam) - lam * nx).abs() <= 1e-12 * (1.0 + lam * nx));
        prop_assert!((n.eval(-x) - nx).abs() <= 1e-12 * (1.0 + nx));
        prop_assert!(nx > 0.0 || x == Vec2::ZERO);
    }

    #[test]
    fn triangle_inequality(i in norm_index(), x in point(), y in point()) {
        let n = &fleet()[i];
        let lhs = n.eval(x + y);
        let rhs = n.eval(x) + n.eval(y);
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn polarization_bounds(i in norm_index(), z in point(), y in point(), lam in 0.01..10.0f64) {
        let n = &fleet()[i];
        let v = n.polarization(z, y);
        let scale = n.eval(z) * n.eval(y);
        let mag = n.eval(z).powi(2) + n.eval(y).powi(2) + n.eval(z - y).powi(2);
        prop_assert!(v.abs() <= scale + 1e-12 * mag);
        let v2 = n.polarization(z * lam, y * lam);
        prop_assert!((v2 - lam * lam * v).abs() <= 1e-11 * lam * lam * (1.0 + mag));
    }

    #[test]
    fn subgradient_inequality(i in norm_index(), x in point(), y in point(), t in 0.0..1.0f64) {
        prop_assume!(x != Vec2::ZERO);
        let n = &fleet()[i];
        let s = seg(n.subdifferential(x));
        let u = s.point(t);
        let nx = n.eval(x);
        prop_assert!((u.dot(x) - nx).abs() <= 1e-12 * (1.0 + nx));
        let ny = n.eval(y);
        prop_assert!(ny >= nx + u.dot(y - x) - 1e-12 * (1.0 + nx + ny));
    }

    #[test]
    fn subdifferential_monotone(i in norm_index(), x in point(), y in point(), s in 0.0..1.0f64, t in 0.0..1.0f64) {
        prop_assume!(x != Vec2::ZERO && y != Vec2::ZERO);
        let n = &fleet()[i];
        let v = seg(n.subdifferential(x)).point(s);
        let w = seg(n.subdifferential(y)).point(t);
        let scale = (v.norm() + w.norm()) * (x.norm() + y.norm());
        prop_assert!((v - w).dot(x - y) >= -1e-12 * scale);
    }

    #[test]
    fn gradient_oddness_and_homogeneity(i in norm_index(), x in point(), lam in 0.0..10.0f64) {
        let n = &fleet()[i];
        prop_assume!(!n.is_on_ray(x));
        let g = n.grad_norm_sq(x, RayPolicy::Error).unwrap().value;
        let gm = n.grad_norm_sq(-x, RayPolicy::Error).unwrap().value;
        prop_assert!((g + gm).norm() <= 1e-12 * (1.0 + g.norm()));
        let gl = n.grad_norm_sq(x * lam, RayPolicy::Error).unwrap().value;
        prop_assert!((gl - g * lam).norm() <= 1e-12 * (1.0 + lam * g.norm()));
    }

    #[test]
    fn gradient_matches_central_difference(i in norm_index(), x in point()) {
        let n = &fleet()[i];
        let h = 1e-5 * (1.0 + x.norm());
        // stay clear of kinks so the difference quotient is meaningful
        let rays = n.non_differentiability_rays();
        prop_assume!(x.norm() > 1e-2);
        // |t|^p with 1 < p < 2 has unbounded curvature at the axes
        prop_assume!(x.x.abs().min(x.y.abs()) > 1e-2 * x.norm());
        prop_assume!(distance_to_rays(&rays, x.angle()) * x.norm() > 4.0 * h * n.circumradius() / n.inradius());
        let g = n.grad_norm_sq(x, RayPolicy::Error).unwrap().value;
        let f = |p: Vec2| n.eval(p).powi(2);
        let fd = Vec2::new(
            (f(x + Vec2::E1 * h) - f(x - Vec2::E1 * h)) / (2.0 * h),
            (f(x + Vec2::E2 * h) - f(x - Vec2::E2 * h)) / (2.0 * h),
        );
        prop_assert!((g - fd).norm() <= 1e-6 * (1.0 + g.norm()), "{} {:?} {:?}", n.label(), g, fd);
    }
}

#[test]
fn sqrt2_sanity() {
    let l1 = NormDescriptor::lp(1.0).unwrap();
    assert!((l1.inradius() - 1.0 / SQRT_2).abs() < 1e-15);
}
