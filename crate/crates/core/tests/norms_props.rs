use std::f64::consts::PI;

use dirichlet_core::norms::{sampled_disk, unit_square};
use dirichlet_core::NormDescriptor;
use proptest::prelude::*;

/// Radial samples of the ellipse with semi-axes `a`, `b`.
fn ellipse(a: f64, b: f64, n: usize) -> NormDescriptor {
    let angles: Vec<f64> = (0..n).map(|i| PI * i as f64 / n as f64).collect();
    let radii = angles.iter().map(|t| 1.0 / ((t.cos() / a).powi(2) + (t.sin() / b).powi(2)).sqrt()).collect();
    NormDescriptor::radial(angles, radii).unwrap()
}

fn bodies() -> Vec<NormDescriptor> {
    vec![
        NormDescriptor::euclidean2(),
        NormDescriptor::sup2(),
        NormDescriptor::lp(1.0).unwrap(),
        NormDescriptor::lp(3.0).unwrap(),
        NormDescriptor::polygon(vec![[1.0, 0.0], [0.5, 0.9], [-0.5, 0.9]]).unwrap(),
        NormDescriptor::polygon(vec![[1.0, 0.0], [2.0, 1.0]]).unwrap(),
        sampled_disk(1.5, 64).unwrap(),
        ellipse(1.1, 0.9, 48),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn boundary_points_have_gauge_one(theta in 0.0..2.0 * PI) {
        for norm in bodies() {
            let x = norm.boundary_point(theta).unwrap();
            prop_assert!((norm.eval2(x) - 1.0).abs() <= 1e-10, "{} at {theta}", norm.label());
        }
    }

    #[test]
    fn square_polygon_is_sup(x in -10.0..10.0f64, y in -10.0..10.0f64) {
        let sq = unit_square();
        prop_assert!((sq.eval2([x, y]) - NormDescriptor::sup2().eval2([x, y])).abs() <= 1e-12);
    }

    #[test]
    fn unit_balls_are_convex(a in 0.0..2.0 * PI, b in 0.0..2.0 * PI, lambda in 0.0..1.0f64) {
        for norm in bodies() {
            let (x, y) = (norm.boundary_point(a).unwrap(), norm.boundary_point(b).unwrap());
            let mix = [lambda * x[0] + (1.0 - lambda) * y[0], lambda * x[1] + (1.0 - lambda) * y[1]];
            prop_assert!(norm.eval2(mix) <= 1.0 + 1e-10, "{}", norm.label());
        }
    }

    #[test]
    fn gauge_is_homogeneous_and_symmetric(x in -5.0..5.0f64, y in -5.0..5.0f64, c in 0.01..100.0f64) {
        for norm in bodies() {
            let v = norm.eval2([x, y]);
            prop_assert!((norm.eval2([c * x, c * y]) - c * v).abs() <= 1e-9 * (1.0 + c * v));
            prop_assert!((norm.eval2([-x, -y]) - v).abs() <= 1e-12 * (1.0 + v));
        }
    }

    #[test]
    fn equivalence_constants_bracket_the_gauge(theta in 0.0..2.0 * PI) {
        for norm in bodies() {
            let (k1, k2) = norm.equivalence_constants();
            let v = norm.eval2([theta.cos(), theta.sin()]);
            prop_assert!(k1 * (1.0 - 1e-9) <= v && v <= k2 * (1.0 + 1e-9), "{}", norm.label());
        }
    }
}

#[test]
fn quadrature_area_matches_closed_forms() {
    for norm in [NormDescriptor::euclidean2(), NormDescriptor::sup2(), NormDescriptor::lp(1.0).unwrap()] {
        let exact = norm.exact_area().unwrap();
        assert!((norm.ball_area(100_000).unwrap() - exact).abs() < 1e-6 * exact);
    }
}

#[test]
fn norm_spec_json_round_trip() {
    for norm in bodies() {
        let json = serde_json::to_string(norm.spec()).unwrap();
        let back = NormDescriptor::new(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.spec(), norm.spec());
    }
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(NormDescriptor::lp(0.5).is_err());
    assert!(NormDescriptor::polygon(vec![[1.0, 0.0]]).is_err());
    assert!(NormDescriptor::radial(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
    assert!(NormDescriptor::euclidean2().evaluate(&[1.0, 2.0, 3.0]).is_err());
}
