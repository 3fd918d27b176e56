//! The upper half-plane model of the space of planar unimodular lattices.
//!
//! A lattice `gℤ²` corresponds to the point `g⁻¹·i` modulo the modular
//! group acting by Möbius maps; the standard fundamental domain is
//! `D = {|Re z| ≤ 1/2, |z| ≥ 1}`. The Euclidean-critical lattices sit at the
//! order-3 corner `z₀ = −1/2 + i√3/2`, and `δ₂ ≥ r` is the height condition
//! `Im z ≤ Δ₂/r²` in `D`.
//!
//! Only left actions are exposed: the point of `gℤ²` is `mobius(g⁻¹, i)`.
//! For the trajectory of `a_s u_α ℤ²` this gives
//!
//! ```
//! use dirichlet_core::hyperbolic::{mobius, HalfPlanePoint};
//! use dirichlet_core::mat2::{diagonal_flow, inverse, mul, upper_unipotent};
//!
//! let (s, alpha) = (0.8, 0.3);
//! let g = mul(&diagonal_flow(s), &upper_unipotent(alpha));
//! let z = mobius(&inverse(&g).unwrap(), HalfPlanePoint::I).unwrap();
//! assert!((z.x + alpha).abs() < 1e-12);
//! assert!((z.y - (-2.0 * s).exp()).abs() < 1e-12);
//! ```

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::mat2::{self, Mat2};

/// `Δ₂ = √3/2`.
pub const EUCLIDEAN_DELTA: f64 = 0.866_025_403_784_438_6;

/// `z₀ = −1/2 + i√3/2`.
pub const Z0: HalfPlanePoint = HalfPlanePoint { x: -0.5, y: EUCLIDEAN_DELTA };

pub const MAX_REDUCTION_STEPS: usize = 1_000_000;
const Y_FLOOR: f64 = 1e-300;
const EDGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub const I: HalfPlanePoint = HalfPlanePoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > Y_FLOOR) {
            return Err(Error::OutOfDomain(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(HalfPlanePoint { x, y })
    }

    pub fn abs2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Integer matrices of determinant 1.
pub type Gamma = [[i64; 2]; 2];

pub const GAMMA_IDENTITY: Gamma = [[1, 0], [0, 1]];

fn gamma_mul(a: &Gamma, b: &Gamma) -> Result<Gamma> {
    let mut out = [[0_i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let x = a[i][0].checked_mul(b[0][j]);
            let y = a[i][1].checked_mul(b[1][j]);
            out[i][j] = x
                .zip(y)
                .and_then(|(x, y)| x.checked_add(y))
                .ok_or_else(|| Error::Overflow("reduction matrix exceeds i64".into()))?;
        }
    }
    Ok(out)
}

pub fn gamma_to_mat2(g: &Gamma) -> Mat2 {
    [[g[0][0] as f64, g[0][1] as f64], [g[1][0] as f64, g[1][1] as f64]]
}

/// `(az + b)/(cz + d)` for `det g = 1`.
pub fn mobius(g: &Mat2, z: HalfPlanePoint) -> Result<HalfPlanePoint> {
    let det = mat2::det(g);
    if (det - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnimodular(det));
    }
    let [[a, b], [c, d]] = *g;
    // denominator cz + d
    let (dx, dy) = (c * z.x + d, c * z.y);
    let den = dx * dx + dy * dy;
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::Numeric("cz + d vanishes: the point is sent to the cusp".into()));
    }
    let (nx, ny) = (a * z.x + b, a * z.y);
    let x = (nx * dx + ny * dy) / den;
    // Im(gz) = Im z / |cz + d|² for det g = 1
    let y = z.y / den;
    HalfPlanePoint::new(x, y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub z_reduced: HalfPlanePoint,
    /// `gamma·z = z_reduced`.
    pub gamma: Gamma,
    /// The moves applied, leftmost first, e.g. `T^-5` or `S T^1`.
    pub word: String,
    pub steps: usize,
}

/// Move `z` into the closed fundamental domain, with the left edge and the
/// left half of the arc as canonical representatives of boundary points.
pub fn reduce(z: HalfPlanePoint) -> Result<ReductionResult> {
    let mut z = HalfPlanePoint::new(z.x, z.y)?;
    let mut gamma = GAMMA_IDENTITY;
    let mut moves: Vec<String> = Vec::new();
    let mut steps = 0;
    let translate = |z: &mut HalfPlanePoint, gamma: &mut Gamma, moves: &mut Vec<String>, n: i64| -> Result<()> {
        if n != 0 {
            z.x -= n as f64;
            *gamma = gamma_mul(&[[1, -n], [0, 1]], gamma)?;
            moves.push(format!("T^{}", -n));
        }
        Ok(())
    };
    loop {
        steps += 1;
        if steps > MAX_REDUCTION_STEPS {
            return Err(Error::IterationCap("reduction to the fundamental domain".into()));
        }
        let n = z.x.round();
        if n.abs() > 9.0e18 {
            return Err(Error::Overflow("translation exceeds i64".into()));
        }
        translate(&mut z, &mut gamma, &mut moves, n as i64)?;
        if z.abs2() < 1.0 - EDGE_TOL {
            let r2 = z.abs2();
            z = HalfPlanePoint::new(-z.x / r2, z.y / r2)?;
            gamma = gamma_mul(&[[0, -1], [1, 0]], &gamma)?;
            moves.push("S".into());
        } else {
            break;
        }
    }
    // boundary canonicalization
    if z.x > 0.5 - EDGE_TOL {
        translate(&mut z, &mut gamma, &mut moves, 1)?;
    }
    if z.abs2() < 1.0 + EDGE_TOL && z.x > EDGE_TOL {
        // on the arc: −1/z = −z̄ there
        let r2 = z.abs2();
        z = HalfPlanePoint::new(-z.x / r2, z.y / r2)?;
        gamma = gamma_mul(&[[0, -1], [1, 0]], &gamma)?;
        moves.push("S".into());
    }
    moves.reverse();
    let word = if moves.is_empty() { "I".to_string() } else { moves.join(" ") };
    Ok(ReductionResult { z_reduced: z, gamma, word, steps })
}

/// Whether `z` lies in the closed fundamental domain (tolerance `tol`).
pub fn in_fundamental_domain(z: HalfPlanePoint, tol: f64) -> bool {
    z.x.abs() <= 0.5 + tol && z.abs2() >= 1.0 - tol
}

/// `2·asinh(|z − w| / (2√(Im z·Im w)))`.
pub fn distance(z: HalfPlanePoint, w: HalfPlanePoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    2.0 * ((dx * dx + dy * dy).sqrt() / (2.0 * (z.y * w.y).sqrt())).asinh()
}

/// The reduced point `g⁻¹·i` of a planar unimodular lattice `gℤ²`.
pub fn point_of_lattice(lattice: &Lattice) -> Result<ReductionResult> {
    if !lattice.is_unimodular() {
        return Err(Error::NotUnimodular(lattice.covolume()));
    }
    let mut g = lattice.as_mat2()?;
    if mat2::det(&g) < 0.0 {
        // same lattice, orientation-preserving basis
        g[0][1] = -g[0][1];
        g[1][1] = -g[1][1];
    }
    // rescale away the rounding in the determinant
    let scale = 1.0 / mat2::det(&g).sqrt();
    let g = [[g[0][0] * scale, g[0][1] * scale], [g[1][0] * scale, g[1][1] * scale]];
    let gi = mat2::inverse(&g).ok_or(Error::DegenerateBasis(0.0))?;
    reduce(mobius(&gi, HalfPlanePoint::I)?)
}

/// A lattice whose point is `z`: the basis `[[1/√y, −x/√y], [0, √y]]`.
pub fn lattice_of_point(z: HalfPlanePoint) -> Result<Lattice> {
    let sy = z.y.sqrt();
    Lattice::from_mat2(&[[1.0 / sy, -z.x / sy], [0.0, sy]])
}

/// `Im z ≤ Δ₂/r²` at the reduced point, the Euclidean form of `δ₂ ≥ r`.
pub fn height_criterion(lattice: &Lattice, r: f64) -> Result<bool> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::OutOfDomain(format!("radius must lie in (0, 1], got {r}")));
    }
    Ok(point_of_lattice(lattice)?.z_reduced.y <= EUCLIDEAN_DELTA / (r * r))
}

/// Distance from the reduced point to `{z₀, z₀ + 1}`, the orbit of the
/// critical point inside the closed fundamental domain.
pub fn distance_to_critical_point(z: HalfPlanePoint) -> Result<f64> {
    let zr = reduce(z)?.z_reduced;
    let right = HalfPlanePoint { x: Z0.x + 1.0, y: Z0.y };
    Ok(distance(zr, Z0).min(distance(zr, right)))
}

pub fn distance_to_critical(lattice: &Lattice) -> Result<f64> {
    let zr = point_of_lattice(lattice)?.z_reduced;
    distance_to_critical_point(zr)
}

/// `γz₀` for an integer matrix of determinant 1.
pub fn gamma_z0(g: &Gamma) -> Result<HalfPlanePoint> {
    mobius(&gamma_to_mat2(g), Z0)
}

/// `Re(γz₀) = (ac + bd − (ad + bc)/2)/(c² − cd + d²)` in floating point.
pub fn re_gamma_z0(g: &Gamma) -> f64 {
    let [[a, b], [c, d]] = g.map(|row| row.map(|v| v as f64));
    (a * c + b * d - (a * d + b * c) / 2.0) / (c * c - c * d + d * d)
}

/// The same real part as an exact rational.
pub fn re_gamma_z0_exact(g: &Gamma) -> Result<Ratio<i128>> {
    let [[a, b], [c, d]] = g.map(|row| row.map(|v| v as i128));
    let overflow = || Error::Overflow("Re(γz₀) numerator exceeds i128".into());
    let num = (|| {
        2_i128
            .checked_mul(a.checked_mul(c)?)?
            .checked_add(2_i128.checked_mul(b.checked_mul(d)?)?)?
            .checked_sub(a.checked_mul(d)?)?
            .checked_sub(b.checked_mul(c)?)
    })()
    .ok_or_else(overflow)?;
    let den = (|| 2_i128.checked_mul(c.checked_mul(c)?.checked_sub(c.checked_mul(d)?)?.checked_add(d.checked_mul(d)?)?))()
        .ok_or_else(overflow)?;
    if den == 0 {
        return Err(Error::OutOfDomain("c and d cannot both vanish".into()));
    }
    Ok(Ratio::new(num, den))
}

/// `Im(γz₀) = (√3/2)/(c² − cd + d²)`.
pub fn im_gamma_z0(g: &Gamma) -> f64 {
    let (c, d) = (g[1][0] as f64, g[1][1] as f64);
    EUCLIDEAN_DELTA / (c * c - c * d + d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hexagonal_basis;
    use crate::norms::NormDescriptor;

    fn close(z: HalfPlanePoint, x: f64, y: f64, tol: f64) -> bool {
        (z.x - x).abs() < tol && (z.y - y).abs() < tol
    }

    #[test]
    fn mobius_examples() {
        let z = HalfPlanePoint::new(0.3, 0.7).unwrap();
        assert_eq!(mobius(&mat2::IDENTITY, z).unwrap(), z);
        let s = [[0.0, -1.0], [1.0, 0.0]];
        assert!(close(mobius(&s, HalfPlanePoint::new(0.0, 0.5).unwrap()).unwrap(), 0.0, 2.0, 1e-15));
        let g0i = mat2::inverse(&hexagonal_basis()).unwrap();
        assert!(close(mobius(&g0i, HalfPlanePoint::I).unwrap(), -0.5, EUCLIDEAN_DELTA, 1e-15));
        assert!(mobius(&[[2.0, 0.0], [0.0, 1.0]], z).is_err());
        assert!(mobius(&s, HalfPlanePoint { x: 0.0, y: 0.0 }).is_err());
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(HalfPlanePoint::new(5.0, 2.0).unwrap()).unwrap();
        assert!(close(r.z_reduced, 0.0, 2.0, 1e-15));
        assert_eq!(r.gamma, [[1, -5], [0, 1]]);
        assert_eq!(r.word, "T^-5");
        let r = reduce(HalfPlanePoint::new(0.0, 0.5).unwrap()).unwrap();
        assert!(close(r.z_reduced, 0.0, 2.0, 1e-15));
        assert_eq!(r.word, "S");
        let z = HalfPlanePoint::new(0.3, 0.1).unwrap();
        let r = reduce(z).unwrap();
        assert!(in_fundamental_domain(r.z_reduced, 1e-12));
        let back = mobius(&gamma_to_mat2(&r.gamma), z).unwrap();
        assert!(close(back, r.z_reduced.x, r.z_reduced.y, 1e-9));
        // −1/z = −3 + i, then a translation
        assert!(close(r.z_reduced, 0.0, 1.0, 1e-12));
        assert_eq!(r.gamma, [[3, -1], [1, 0]]);
        assert_eq!(r.word, "T^3 S");
    }

    #[test]
    fn boundary_canonicalization() {
        let r = reduce(HalfPlanePoint::new(0.5, 2.0).unwrap()).unwrap();
        assert!(close(r.z_reduced, -0.5, 2.0, 1e-15));
        let (s, c) = 1.2_f64.sin_cos();
        let r = reduce(HalfPlanePoint::new(c, s).unwrap()).unwrap();
        assert!(r.z_reduced.x < 0.0 && (r.z_reduced.abs2() - 1.0).abs() < 1e-12);
        let r = reduce(HalfPlanePoint::new(0.5, EUCLIDEAN_DELTA).unwrap()).unwrap();
        assert!(close(r.z_reduced, -0.5, EUCLIDEAN_DELTA, 1e-12));
    }

    #[test]
    fn distances() {
        let i2 = HalfPlanePoint::new(0.0, 2.0).unwrap();
        assert!((distance(HalfPlanePoint::I, i2) - 2.0_f64.ln()).abs() < 1e-15);
        let right = HalfPlanePoint::new(0.5, EUCLIDEAN_DELTA).unwrap();
        assert!((distance(Z0, right) - 3.0_f64.ln()).abs() < 1e-14);
        assert_eq!(distance(Z0, Z0), 0.0);
    }

    #[test]
    fn lattice_points() {
        let z2 = Lattice::standard(2).unwrap();
        assert!(close(point_of_lattice(&z2).unwrap().z_reduced, 0.0, 1.0, 1e-15));
        let g0 = Lattice::from_mat2(&hexagonal_basis()).unwrap();
        assert!(close(point_of_lattice(&g0).unwrap().z_reduced, -0.5, EUCLIDEAN_DELTA, 1e-12));
        let a1 = Lattice::from_mat2(&mat2::diagonal_flow(1.0)).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert!(close(point_of_lattice(&a1).unwrap().z_reduced, 0.0, e2, 1e-12));
        let flipped = Lattice::from_mat2(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(close(point_of_lattice(&flipped).unwrap().z_reduced, 0.0, 1.0, 1e-15));
    }

    #[test]
    fn height_examples() {
        let g0 = Lattice::from_mat2(&hexagonal_basis()).unwrap();
        assert!(height_criterion(&g0, 1.0).unwrap());
        let z2 = Lattice::standard(2).unwrap();
        let threshold = EUCLIDEAN_DELTA.sqrt();
        assert!(height_criterion(&z2, threshold - 1e-9).unwrap());
        assert!(!height_criterion(&z2, threshold + 1e-9).unwrap());
        let a1 = Lattice::from_mat2(&mat2::diagonal_flow(1.0)).unwrap();
        assert!(height_criterion(&a1, 0.3423).unwrap());
        assert!(!height_criterion(&a1, 0.3424).unwrap());
        assert!(height_criterion(&a1, 0.0).is_err());
    }

    #[test]
    fn critical_distances() {
        let g0 = Lattice::from_mat2(&hexagonal_basis()).unwrap();
        assert!(distance_to_critical(&g0).unwrap() < 1e-7);
        let z2 = Lattice::standard(2).unwrap();
        let d = distance_to_critical(&z2).unwrap();
        assert!((d - distance(HalfPlanePoint::I, Z0)).abs() < 1e-15);
        assert!((d - 0.549_306_144_334_054_8).abs() < 1e-12, "{d}");
        let right = lattice_of_point(HalfPlanePoint::new(0.5, EUCLIDEAN_DELTA).unwrap()).unwrap();
        assert!(distance_to_critical(&right).unwrap() < 1e-7);
    }

    #[test]
    fn point_to_lattice_round_trip() {
        let z = HalfPlanePoint::new(-0.2, 1.7).unwrap();
        let l = lattice_of_point(z).unwrap();
        assert!(close(point_of_lattice(&l).unwrap().z_reduced, z.x, z.y, 1e-12));
        let delta = l.delta(&NormDescriptor::euclidean2(), EUCLIDEAN_DELTA).unwrap();
        assert!((delta - (EUCLIDEAN_DELTA / z.y).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orbit_real_parts() {
        let g: Gamma = [[2, 1], [5, 3]];
        let exact = re_gamma_z0_exact(&g).unwrap();
        let float = gamma_z0(&g).unwrap();
        assert!((*exact.numer() as f64 / *exact.denom() as f64 - float.x).abs() < 1e-12);
        assert!((re_gamma_z0(&g) - float.x).abs() < 1e-12);
        assert!((im_gamma_z0(&g) - float.y).abs() < 1e-12);
    }
}
