use std::f64::consts::PI;

use dirichlet_core::critical::{critical_determinant, locus_csv, trace_critical_locus, LOCUS_CSV_HEADER};
use dirichlet_core::mat2;
use dirichlet_core::norms::sampled_disk;
use dirichlet_core::{Lattice, NormDescriptor};

fn bodies() -> Vec<NormDescriptor> {
    vec![
        NormDescriptor::euclidean2(),
        NormDescriptor::lp(3.0).unwrap(),
        NormDescriptor::lp(1.5).unwrap(),
        NormDescriptor::polygon(vec![[1.0, 0.0], [0.5, 0.9], [-0.5, 0.9]]).unwrap(),
        NormDescriptor::polygon(vec![[1.0, 0.0], [0.8, 0.6], [0.0, 1.0], [-0.7, 0.7]]).unwrap(),
    ]
}

#[test]
fn traced_configurations_are_admissible() {
    for norm in bodies() {
        let crit = critical_determinant(&norm).unwrap();
        for entry in trace_critical_locus(&norm, &crit, 90).unwrap() {
            let c = entry.config;
            let lat = Lattice::from_mat2(&mat2::from_columns(c.p, c.q)).unwrap();
            let len = lat.shortest_vector(&norm).unwrap().length;
            assert!(len >= 1.0 - 1e-8, "{} at t0 = {}: {len}", norm.label(), entry.t0);
        }
    }
}

#[test]
fn minkowski_lower_bound() {
    for norm in bodies() {
        let delta = critical_determinant(&norm).unwrap().delta;
        let area = norm.ball_area(1_000_000).unwrap();
        assert!(delta >= area / 4.0 - 1e-6, "{}: {delta} < {}", norm.label(), area / 4.0);
    }
}

#[test]
fn scaling_by_two_multiplies_by_four() {
    let unit = critical_determinant(&NormDescriptor::euclidean2()).unwrap().delta;
    let big = critical_determinant(&sampled_disk(2.0, 64).unwrap()).unwrap().delta;
    assert!((big - 4.0 * unit).abs() <= 1e-8, "{big} vs {}", 4.0 * unit);
}

fn admissible(norm: &NormDescriptor, b1: [f64; 2], b2: [f64; 2]) -> bool {
    for a in -10i64..=10 {
        for b in -10i64..=10 {
            if (a, b) == (0, 0) {
                continue;
            }
            let v = [a as f64 * b1[0] + b as f64 * b2[0], a as f64 * b1[1] + b as f64 * b2[1]];
            if norm.eval2(v) < 1.0 - 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Smallest covolume over admissible bases `[x(θ₁), c·x(θ₂)]`, with `c`
/// found by bisection for each angle pair.
fn brute_force_covolume(norm: &NormDescriptor) -> f64 {
    let covolume = |t1: f64, t2: f64| -> f64 {
        let p = norm.boundary_point(t1).unwrap();
        let q = norm.boundary_point(t2).unwrap();
        let area = (p[0] * q[1] - p[1] * q[0]).abs();
        if area < 1e-3 {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.5, 3.0);
        if !admissible(norm, p, [hi * q[0], hi * q[1]]) {
            return f64::INFINITY;
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if admissible(norm, p, [mid * q[0], mid * q[1]]) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi * area
    };
    let n = 36;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        for j in 1..n {
            let t1 = PI * i as f64 / n as f64;
            let t2 = t1 + PI * j as f64 / n as f64;
            let v = covolume(t1, t2);
            if v < best.0 {
                best = (v, t1, t2);
            }
        }
    }
    // pattern search around the best grid point
    let mut step = PI / n as f64;
    while step > 1e-7 {
        let mut moved = false;
        for (d1, d2) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = covolume(best.1 + d1, best.2 + d2);
            if v < best.0 {
                best = (v, best.1 + d1, best.2 + d2);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best.0
}

#[test]
fn brute_force_oracle_agrees() {
    for norm in [NormDescriptor::euclidean2(), NormDescriptor::lp(3.0).unwrap()] {
        let delta = critical_determinant(&norm).unwrap().delta;
        let brute = brute_force_covolume(&norm);
        assert!((brute - delta).abs() <= 1e-3, "{}: brute {brute} vs {delta}", norm.label());
    }
}

#[test]
fn locus_marks_every_euclidean_angle_critical() {
    let norm = NormDescriptor::euclidean2();
    let crit = critical_determinant(&norm).unwrap();
    let locus = trace_critical_locus(&norm, &crit, 24).unwrap();
    assert!(locus.iter().all(|e| e.is_critical));
    for e in &locus {
        assert!((mat2::det(&e.basis).abs() - 1.0).abs() < 1e-8);
    }
    let csv = locus_csv(&locus);
    assert_eq!(csv.lines().next(), Some(LOCUS_CSV_HEADER));
    assert_eq!(csv.lines().count(), 25);
}

#[test]
fn lp_critical_determinants_lie_between_the_extremes() {
    let mut prev = 0.5;
    for p in [1.25, 1.5, 2.0] {
        let d = critical_determinant(&NormDescriptor::lp(p).unwrap()).unwrap().delta;
        assert!(d > prev - 1e-9, "p = {p}: {d}");
        prev = d;
    }
}
