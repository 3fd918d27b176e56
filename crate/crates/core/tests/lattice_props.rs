use dirichlet_core::critical::critical_determinant;
use dirichlet_core::lattice::sampling;
use dirichlet_core::mat2::{self, Mat2};
use dirichlet_core::{Lattice, NormDescriptor};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DELTA2: f64 = 0.866_025_403_784_438_6;

fn lattice_from(theta: f64, s: f64, x: f64) -> Lattice {
    let g = mat2::mul(&mat2::rotation(theta), &mat2::mul(&mat2::diagonal_flow(s), &mat2::upper_unipotent(x)));
    Lattice::from_mat2(&g).unwrap()
}

fn four_norms() -> Vec<(NormDescriptor, f64)> {
    let l3 = NormDescriptor::lp(3.0).unwrap();
    let l3_delta = critical_determinant(&l3).unwrap().delta;
    vec![
        (NormDescriptor::sup2(), 1.0),
        (NormDescriptor::euclidean2(), DELTA2),
        (NormDescriptor::lp(1.0).unwrap(), 0.5),
        (l3, l3_delta),
    ]
}

/// Integer matrix of determinant 1 with entries of modulus at most 10.
fn small_unimodular() -> impl Strategy<Value = [[i64; 2]; 2]> {
    prop::collection::vec((0usize..4, -3i64..=3), 1..6).prop_filter_map("entries too large", |ops| {
        let mut m = [[1i64, 0], [0, 1]];
        for (kind, k) in ops {
            let e = match kind {
                0 => [[1, k], [0, 1]],
                1 => [[1, 0], [k, 1]],
                2 => [[0, -1], [1, 0]],
                _ => [[-1, 0], [0, -1]],
            };
            m = [
                [m[0][0] * e[0][0] + m[0][1] * e[1][0], m[0][0] * e[0][1] + m[0][1] * e[1][1]],
                [m[1][0] * e[0][0] + m[1][1] * e[1][0], m[1][0] * e[0][1] + m[1][1] * e[1][1]],
            ];
        }
        m.iter().flatten().all(|v| v.abs() <= 10).then_some(m)
    })
}

#[test]
fn delta_never_exceeds_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let norms = four_norms();
    for _ in 0..10_000 {
        let lat = sampling::random_unimodular(&mut rng);
        for (norm, crit) in &norms {
            let d = lat.delta(norm, *crit).unwrap();
            assert!(d <= 1.0 + 1e-6, "{} gives {d}", norm.label());
        }
    }
}

#[test]
fn shortest_vector_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let norms = four_norms();
    for _ in 0..500 {
        let g: Mat2 = sampling::random_unimodular_mat2(&mut rng);
        let lat = Lattice::from_mat2(&g).unwrap();
        for (norm, _) in &norms {
            let mut best = f64::INFINITY;
            for a in -50i64..=50 {
                for b in -50i64..=50 {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let v = mat2::apply(&g, [a as f64, b as f64]);
                    best = best.min(norm.eval2(v));
                }
            }
            let got = lat.shortest_vector(norm).unwrap().length;
            assert!((got - best).abs() <= 1e-12 * best.max(1.0), "{}: {got} vs {best}", norm.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn basis_change_keeps_the_shortest_length(
        theta in 0.0..std::f64::consts::TAU, s in 0.0..2.0f64, x in 0.0..1.0f64, u in small_unimodular()
    ) {
        let lat = lattice_from(theta, s, x);
        let changed = lat.change_basis(&DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]])).unwrap();
        for (norm, _) in four_norms() {
            let a = lat.shortest_vector(&norm).unwrap().length;
            let b = changed.shortest_vector(&norm).unwrap().length;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn euclidean_delta_is_rotation_invariant(
        theta in 0.0..std::f64::consts::TAU, s in 0.0..2.0f64, x in 0.0..1.0f64, k in 0.0..std::f64::consts::TAU
    ) {
        let norm = NormDescriptor::euclidean2();
        let lat = lattice_from(theta, s, x);
        let turned = lat.transformed2(&mat2::rotation(k)).unwrap();
        let (a, b) = (lat.delta(&norm, DELTA2).unwrap(), turned.delta(&norm, DELTA2).unwrap());
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn shortest_vector_is_a_lattice_vector(theta in 0.0..std::f64::consts::TAU, s in 0.0..2.0f64, x in 0.0..1.0f64) {
        let lat = lattice_from(theta, s, x);
        let g = lat.as_mat2().unwrap();
        for (norm, _) in four_norms() {
            let sv = lat.shortest_vector(&norm).unwrap();
            let v = mat2::apply(&g, [sv.coefficients[0] as f64, sv.coefficients[1] as f64]);
            prop_assert!((v[0] - sv.point[0]).abs() < 1e-12 && (v[1] - sv.point[1]).abs() < 1e-12);
            prop_assert!((norm.eval2(v) - sv.length).abs() < 1e-12);
        }
    }
}

#[test]
fn higher_dimensional_delta_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    for (d, crit) in [(3usize, std::f64::consts::FRAC_1_SQRT_2), (4, 0.5)] {
        let norm = NormDescriptor::euclidean(d).unwrap();
        for _ in 0..200 {
            let mut m = DMatrix::<f64>::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
            let det: f64 = m.determinant();
            if det.abs() < 0.05 {
                continue;
            }
            m /= det.abs().powf(1.0 / d as f64);
            let lat = Lattice::new(m).unwrap();
            assert!(lat.delta(&norm, crit).unwrap() <= 1.0 + 1e-6);
        }
    }
}

#[test]
fn non_unimodular_delta_is_rejected() {
    let lat = Lattice::from_mat2(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
    assert!(lat.delta(&NormDescriptor::euclidean2(), DELTA2).is_err());
    assert!(Lattice::from_mat2(&[[1.0, 2.0], [0.5, 1.0]]).is_err());
}
