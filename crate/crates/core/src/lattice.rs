//! Full-rank lattices in dimension 2 to 4, shortest vectors under an
//! arbitrary norm, and the normalized systole `δ_ν`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};
use crate::norms::NormDescriptor;

/// Bases with `|det|` at or below this are rejected.
pub const DEGENERATE_DET: f64 = 1e-12;

/// Allowed deviation of the covolume from 1 for unimodular lattices.
pub const UNIMODULAR_TOL: f64 = 1e-9;

const MAX_REDUCTION_STEPS: usize = 100_000;

/// A full-rank lattice `B·ℤ^d`; the columns of `B` generate it.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    covolume: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortestVectorResult {
    /// Integer coordinates of the vector with respect to the lattice basis.
    pub coefficients: Vec<i64>,
    pub point: Vec<f64>,
    pub length: f64,
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let d = basis.nrows();
        if basis.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: basis.ncols() });
        }
        if !(2..=4).contains(&d) {
            return Err(Error::Unsupported(format!("lattices of dimension {d}")));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain("basis entries must be finite".into()));
        }
        let det = basis.determinant();
        if det.abs() <= DEGENERATE_DET {
            return Err(Error::DegenerateBasis(det.abs()));
        }
        Ok(Lattice { basis, covolume: det.abs() })
    }

    /// Build from a row-major matrix, e.g. the JSON `[[a, b], [c, d]]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_mat2(m: &Mat2) -> Result<Self> {
        Self::new(DMatrix::from_fn(2, 2, |i, j| m[i][j]))
    }

    pub fn from_columns2(b1: [f64; 2], b2: [f64; 2]) -> Result<Self> {
        Self::from_mat2(&mat2::from_columns(b1, b2))
    }

    /// The standard lattice `ℤ^d`.
    pub fn standard(d: usize) -> Result<Self> {
        Self::new(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.basis.row(i).iter().copied().collect()).collect()
    }

    /// The basis as a 2×2 matrix (planar lattices only).
    pub fn as_mat2(&self) -> Result<Mat2> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.dim() });
        }
        let b = &self.basis;
        Ok([[b[(0, 0)], b[(0, 1)]], [b[(1, 0)], b[(1, 1)]]])
    }

    pub fn is_unimodular(&self) -> bool {
        (self.covolume - 1.0).abs() < UNIMODULAR_TOL
    }

    /// The lattice `g·Λ`.
    pub fn transformed(&self, g: &DMatrix<f64>) -> Result<Self> {
        if g.nrows() != self.dim() || g.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: g.nrows() });
        }
        Self::new(g * &self.basis)
    }

    pub fn transformed2(&self, g: &Mat2) -> Result<Self> {
        Self::from_mat2(&mat2::mul(g, &self.as_mat2()?))
    }

    /// Same lattice, basis multiplied on the right by an integer matrix.
    pub fn change_basis(&self, u: &DMatrix<i64>) -> Result<Self> {
        let uf = u.map(|v| v as f64);
        Self::new(&self.basis * uf)
    }

    /// A nonzero vector of minimal `ν`-length.
    ///
    /// The basis is first reduced for the Euclidean norm (Lagrange in the
    /// plane, LLL otherwise); then every coefficient vector in a box large
    /// enough to contain all `ν`-minimizers is scanned. The box radius is
    /// `⌈κ₂/κ₁·λ·‖B⁻¹‖_row⌉ + 1` where `λ` bounds the Euclidean minimum and
    /// `(κ₁, κ₂)` are the norm-equivalence constants.
    pub fn shortest_vector(&self, norm: &NormDescriptor) -> Result<ShortestVectorResult> {
        let d = self.dim();
        if norm.dim() != d {
            return Err(Error::DimensionMismatch { expected: norm.dim(), got: d });
        }
        if d > 2 && !(norm.is_euclidean() || norm.is_sup()) {
            return Err(Error::Unsupported(format!(
                "shortest vectors in dimension {d} need the sup or Euclidean norm"
            )));
        }
        if d == 2 {
            let m = self.as_mat2()?;
            let sv = shortest_vector_2d(mat2::column(&m, 0), mat2::column(&m, 1), norm)?;
            return Ok(ShortestVectorResult {
                coefficients: sv.coefficients.to_vec(),
                point: sv.point.to_vec(),
                length: sv.length,
            });
        }
        shortest_vector_general(&self.basis, norm)
    }

    /// `δ_ν(Λ) = Δ_ν^{1/d} · min ν(x)` over nonzero `x ∈ Λ`.
    pub fn delta(&self, norm: &NormDescriptor, critical_det: f64) -> Result<f64> {
        if !(critical_det > 0.0) {
            return Err(Error::OutOfDomain(format!("critical determinant must be positive, got {critical_det}")));
        }
        if !self.is_unimodular() {
            return Err(Error::NotUnimodular(self.covolume));
        }
        let sv = self.shortest_vector(norm)?;
        Ok(critical_det.powf(1.0 / self.dim() as f64) * sv.length)
    }

    /// Membership in the target `K_ν(r) = δ_ν⁻¹([r, 1])`.
    pub fn in_target(&self, norm: &NormDescriptor, critical_det: f64, r: f64) -> Result<bool> {
        if !(r > 0.0) {
            return Err(Error::OutOfDomain(format!("target radius must be positive, got {r}")));
        }
        if r > 1.0 + 1e-9 {
            return Ok(false);
        }
        Ok(self.delta(norm, critical_det)? >= r)
    }
}

/// Shortest vector of a planar lattice, coefficients with respect to the
/// input basis `(b1, b2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shortest2 {
    pub coefficients: [i64; 2],
    pub point: [f64; 2],
    pub length: f64,
}

/// Lagrange (Gauss) reduction of a planar basis for the Euclidean norm.
///
/// Returns the reduced pair `(r1, r2)` with `|r1| ≤ |r2|` and the integer
/// matrix `U` (columns: coefficients of `r1`, `r2`) with `[r1 r2] = [b1 b2]·U`.
pub fn lagrange_reduce(b1: [f64; 2], b2: [f64; 2]) -> Result<([[f64; 2]; 2], [[i64; 2]; 2])> {
    let mut v = [b1, b2];
    // u[k] holds the coefficients of v[k]
    let mut u = [[1_i64, 0], [0, 1]];
    let norm2 = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
    for _ in 0..MAX_REDUCTION_STEPS {
        if norm2(v[0]) > norm2(v[1]) {
            v.swap(0, 1);
            u.swap(0, 1);
        }
        let n0 = norm2(v[0]);
        if n0 == 0.0 {
            return Err(Error::DegenerateBasis(0.0));
        }
        let mu = (v[0][0] * v[1][0] + v[0][1] * v[1][1]) / n0;
        let m = mu.round();
        if m == 0.0 {
            return Ok((v, u));
        }
        let next = [v[1][0] - m * v[0][0], v[1][1] - m * v[0][1]];
        if norm2(next) >= norm2(v[1]) {
            // rounding has stalled the descent; the pair is reduced to working precision
            return Ok((v, u));
        }
        if m.abs() > 9.0e18 {
            return Err(Error::Overflow("Lagrange multiplier exceeds i64".into()));
        }
        let mi = m as i64;
        let c0 = u[1][0].checked_sub(mi.checked_mul(u[0][0]).ok_or_else(overflow)?).ok_or_else(overflow)?;
        let c1 = u[1][1].checked_sub(mi.checked_mul(u[0][1]).ok_or_else(overflow)?).ok_or_else(overflow)?;
        u[1] = [c0, c1];
        v[1] = next;
    }
    Err(Error::IterationCap("Lagrange reduction".into()))
}

fn overflow() -> Error {
    Error::Overflow("basis transformation coefficients exceed i64".into())
}

/// Shortest `ν`-vector of the planar lattice spanned by `b1`, `b2`.
pub fn shortest_vector_2d(b1: [f64; 2], b2: [f64; 2], norm: &NormDescriptor) -> Result<Shortest2> {
    if norm.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: norm.dim() });
    }
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    if !(det.abs() > DEGENERATE_DET) {
        return Err(Error::DegenerateBasis(det.abs()));
    }
    let (reduced, u) = lagrange_reduce(b1, b2)?;
    let (c, point, length) = shortest_in_reduced(reduced[0], reduced[1], norm);
    let coefficients = [
        c[0] * u[0][0] + c[1] * u[1][0],
        c[0] * u[0][1] + c[1] * u[1][1],
    ];
    Ok(Shortest2 { coefficients, point, length })
}

/// Shortest `ν`-vector given a Lagrange-reduced basis; coefficients are
/// with respect to that reduced basis.
pub fn shortest_in_reduced(r1: [f64; 2], r2: [f64; 2], norm: &NormDescriptor) -> ([i64; 2], [f64; 2], f64) {
    if norm.is_euclidean() {
        // the first vector of a Lagrange-reduced pair realizes λ₁
        return ([1, 0], r1, norm.eval2(r1));
    }
    let (k1, k2) = norm.equivalence_constants();
    let len1 = (r1[0] * r1[0] + r1[1] * r1[1]).sqrt();
    let len2 = (r2[0] * r2[0] + r2[1] * r2[1]).sqrt();
    let det = (r1[0] * r2[1] - r1[1] * r2[0]).abs();
    // rows of the inverse basis have lengths |r2|/det and |r1|/det
    let radius = (k2 / k1 * len1 * len1.max(len2) / det).ceil() as i64 + 1;
    let mut best = ([1_i64, 0_i64], r1, norm.eval2(r1));
    for c1 in 0..=radius {
        let lo = if c1 == 0 { 1 } else { -radius };
        for c2 in lo..=radius {
            let x = [
                c1 as f64 * r1[0] + c2 as f64 * r2[0],
                c1 as f64 * r1[1] + c2 as f64 * r2[1],
            ];
            let v = norm.eval2(x);
            if v < best.2 {
                best = ([c1, c2], x, v);
            }
        }
    }
    best
}

/// LLL-reduce the columns of `basis` (δ = 0.99). Returns the reduced basis
/// and the integer transformation.
fn lll_reduce(basis: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<i64>)> {
    let d = basis.ncols();
    let mut b = basis.clone();
    let mut u = DMatrix::<i64>::identity(d, d);
    let gram_schmidt = |b: &DMatrix<f64>| -> (Vec<Vec<f64>>, Vec<f64>, DMatrix<f64>) {
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut norms = Vec::with_capacity(d);
        let mut mu = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            let mut v: Vec<f64> = b.column(i).iter().copied().collect();
            for j in 0..i {
                let num: f64 = b.column(i).iter().zip(&star[j]).map(|(a, c)| a * c).sum();
                mu[(i, j)] = num / norms[j];
                for (vk, sk) in v.iter_mut().zip(&star[j]) {
                    *vk -= mu[(i, j)] * sk;
                }
            }
            norms.push(v.iter().map(|x| x * x).sum());
            star.push(v);
        }
        (star, norms, mu)
    };
    let mut k = 1;
    let mut steps = 0;
    while k < d {
        steps += 1;
        if steps > MAX_REDUCTION_STEPS {
            return Err(Error::IterationCap("LLL reduction".into()));
        }
        for j in (0..k).rev() {
            let (_, _, mu) = gram_schmidt(&b);
            let q = mu[(k, j)].round();
            if q != 0.0 {
                let bj = b.column(j).clone_owned();
                let mut bk = b.column_mut(k);
                bk -= bj * q;
                let qi = q as i64;
                for r in 0..d {
                    u[(r, k)] = u[(r, k)]
                        .checked_sub(qi.checked_mul(u[(r, j)]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
            }
        }
        let (_, norms, mu) = gram_schmidt(&b);
        if norms[k] >= (0.99 - mu[(k, k - 1)] * mu[(k, k - 1)]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap_columns(k, k - 1);
            u.swap_columns(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    Ok((b, u))
}

fn shortest_vector_general(basis: &DMatrix<f64>, norm: &NormDescriptor) -> Result<ShortestVectorResult> {
    let d = basis.ncols();
    let (reduced, u) = lll_reduce(basis)?;
    let inv = reduced
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateBasis(0.0))?;
    let row_norm = (0..d).map(|i| inv.row(i).norm()).fold(0.0, f64::max);
    let lambda = (0..d).map(|j| reduced.column(j).norm()).fold(f64::INFINITY, f64::min);
    let (k1, k2) = norm.equivalence_constants();
    let radius = (k2 / k1 * lambda * row_norm).ceil() as i64 + 1;

    let mut best: Option<(Vec<i64>, Vec<f64>, f64)> = None;
    let mut coeff = vec![-radius; d];
    loop {
        if coeff.iter().any(|c| *c != 0) {
            let x: Vec<f64> = (0..d)
                .map(|r| (0..d).map(|j| reduced[(r, j)] * coeff[j] as f64).sum())
                .collect();
            let v = norm.evaluate(&x)?;
            if best.as_ref().is_none_or(|b| v < b.2) {
                best = Some((coeff.clone(), x, v));
            }
        }
        // odometer increment over the box
        let mut i = 0;
        loop {
            if i == d {
                let (c, x, len) = best.expect("box contains nonzero vectors");
                let coefficients = (0..d)
                    .map(|r| (0..d).map(|j| u[(r, j)] * c[j]).sum())
                    .collect();
                return Ok(ShortestVectorResult { coefficients, point: x, length: len });
            }
            coeff[i] += 1;
            if coeff[i] > radius {
                coeff[i] = -radius;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Critical determinants known in closed form: the sup norm in any
/// dimension, and the Euclidean norm in dimensions 2 to 4.
pub fn known_critical_determinant(norm: &NormDescriptor) -> Option<f64> {
    if norm.is_sup() {
        return Some(1.0);
    }
    if norm.is_euclidean() {
        return match norm.dim() {
            2 => Some(3.0_f64.sqrt() / 2.0),
            3 => Some(std::f64::consts::FRAC_1_SQRT_2),
            4 => Some(0.5),
            _ => None,
        };
    }
    None
}

/// The hexagonal critical lattice of the Euclidean plane,
/// `g₀ = [[1/√Δ, 1/(2√Δ)], [0, √Δ]]` with `Δ = √3/2`.
pub fn hexagonal_basis() -> Mat2 {
    let sd = (3.0_f64.sqrt() / 2.0).sqrt();
    [[1.0 / sd, 0.5 / sd], [0.0, sd]]
}

/// Random unimodular planar lattices `k·a_s·u_x·ℤ²` with `k` a uniform
/// rotation, `s ∈ [0, 2]` and `x ∈ [0, 1)`. A test and experiment utility,
/// not a Haar-distributed sampler.
pub mod sampling {
    use rand::Rng;

    use crate::mat2::{self, Mat2};

    pub fn random_unimodular_mat2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
        let k = mat2::rotation(rng.gen_range(0.0..std::f64::consts::TAU));
        let a = mat2::diagonal_flow(rng.gen_range(0.0..=2.0));
        let u = mat2::upper_unipotent(rng.gen_range(0.0..1.0));
        mat2::mul(&k, &mat2::mul(&a, &u))
    }

    pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R) -> super::Lattice {
        super::Lattice::from_mat2(&random_unimodular_mat2(rng)).expect("unimodular by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const DELTA2: f64 = 0.866_025_403_784_438_6;

    #[test]
    fn standard_lattice() {
        let z2 = Lattice::standard(2).unwrap();
        let sv = z2.shortest_vector(&NormDescriptor::euclidean2()).unwrap();
        assert_eq!(sv.length, 1.0);
        assert_eq!(sv.point.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
        assert!((z2.delta(&NormDescriptor::euclidean2(), DELTA2).unwrap() - 0.930_604_859_102_099_6).abs() < 1e-12);
        assert_eq!(z2.delta(&NormDescriptor::sup2(), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn hexagonal_lattice_is_critical() {
        let g0 = Lattice::from_mat2(&hexagonal_basis()).unwrap();
        let sv = g0.shortest_vector(&NormDescriptor::euclidean2()).unwrap();
        assert!((sv.length - (2.0 / 3.0_f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!((sv.length - 1.074_569_931_823_542).abs() < 1e-12);
        assert!((g0.delta(&NormDescriptor::euclidean2(), DELTA2).unwrap() - 1.0).abs() < 1e-9);
        assert!(g0.in_target(&NormDescriptor::euclidean2(), DELTA2, 1.0).unwrap());
    }

    #[test]
    fn squeezed_lattice_under_sup_norm() {
        let l = Lattice::from_mat2(&[[2.0, 0.0], [0.0, 0.5]]).unwrap();
        let sv = l.shortest_vector(&NormDescriptor::sup2()).unwrap();
        assert_eq!(sv.length, 0.5);
        assert_eq!(sv.point[0], 0.0);
        assert_eq!(sv.point[1].abs(), 0.5);
    }

    #[test]
    fn target_membership() {
        let z2 = Lattice::standard(2).unwrap();
        let e = NormDescriptor::euclidean2();
        assert!(z2.in_target(&e, DELTA2, 0.9).unwrap());
        assert!(!z2.in_target(&e, DELTA2, 0.95).unwrap());
        assert!(!z2.in_target(&e, DELTA2, 1.5).unwrap());
        assert!(z2.in_target(&e, DELTA2, 0.0).is_err());
    }

    #[test]
    fn degenerate_and_non_unimodular_bases() {
        assert!(matches!(
            Lattice::from_mat2(&[[1.0, 2.0], [2.0, 4.0]]),
            Err(Error::DegenerateBasis(_))
        ));
        let l = Lattice::from_mat2(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(l.delta(&NormDescriptor::euclidean2(), DELTA2), Err(Error::NotUnimodular(_))));
        assert!(matches!(Lattice::standard(5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn unsupported_high_dimensional_norms() {
        let l = Lattice::standard(3).unwrap();
        assert!(l.shortest_vector(&NormDescriptor::lp(3.0).unwrap()).is_err());
    }

    #[test]
    fn higher_dimensional_known_lattices() {
        // D4 scaled to covolume 1 has minimum √2 / 2^{1/4}
        let d4 = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 1.0, 0.0, 0.0, //
                -1.0, 1.0, 1.0, 0.0, //
                0.0, 0.0, -1.0, 1.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        );
        let l = Lattice::new(d4.clone()).unwrap();
        let scale = l.covolume().powf(-0.25);
        let l = Lattice::new(d4 * scale).unwrap();
        let delta = l.delta(&NormDescriptor::euclidean(4).unwrap(), 0.5).unwrap();
        assert!((delta - 1.0).abs() < 1e-9, "{delta}");
        let sup = Lattice::standard(3).unwrap().delta(&NormDescriptor::sup(3).unwrap(), 1.0).unwrap();
        assert_eq!(sup, 1.0);
    }

    #[test]
    fn coefficients_reproduce_the_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let norms = [NormDescriptor::euclidean2(), NormDescriptor::sup2(), NormDescriptor::lp(3.0).unwrap()];
        for _ in 0..200 {
            let m = sampling::random_unimodular_mat2(&mut rng);
            let l = Lattice::from_mat2(&m).unwrap();
            for n in &norms {
                let sv = l.shortest_vector(n).unwrap();
                let x = mat2::apply(&m, [sv.coefficients[0] as f64, sv.coefficients[1] as f64]);
                assert!((x[0] - sv.point[0]).abs() < 1e-9 && (x[1] - sv.point[1]).abs() < 1e-9);
            }
        }
    }
}
