//! Exact real parameters `α` and an incrementally reduced basis of
//! `a_s u_α ℤ²`.
//!
//! Along the flow the lattice vectors `(qα − p, q)` are stretched to
//! `(e^s (qα − p), e^{−s} q)`. At flow time `s` the relevant residuals
//! `qα − p` are of size `e^{−s}` while `q` is of size `e^{s}`, so a double
//! precision `α` is useless beyond `s ≈ 18`. Here `α` is a rational with a
//! few hundred bits, the basis coefficients `(p, q)` are exact integers and
//! only the final stretched vectors are rounded to `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::shortest_in_reduced;
use crate::norms::NormDescriptor;

const MAX_REDUCTION_STEPS: usize = 10_000;

/// Bits of precision needed to follow a trajectory up to flow time `s_max`:
/// `⌈2·s_max·log₂ e⌉ + 96`.
pub fn bits_for_horizon(s_max: f64) -> u64 {
    (2.0 * s_max.max(0.0) * std::f64::consts::LOG2_E).ceil() as u64 + 96
}

/// An exact rational `num/den` with `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alpha {
    num: BigInt,
    den: BigInt,
}

impl Alpha {
    pub fn from_ratio(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::OutOfDomain("zero denominator".into()));
        }
        let r = BigRational::new(num, den);
        Ok(Alpha { num: r.numer().clone(), den: r.denom().clone() })
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Alpha { num: r.numer().clone(), den: r.denom().clone() }
    }

    pub fn from_i64(num: i64, den: i64) -> Result<Self> {
        Self::from_ratio(BigInt::from(num), BigInt::from(den))
    }

    /// The exact binary value of a finite double.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(|r| Self::from_rational(&r))
            .ok_or_else(|| Error::OutOfDomain(format!("α must be finite, got {x}")))
    }

    /// `(a + b√d)/c` rounded to `bits` fractional bits.
    pub fn quadratic(a: i64, b: i64, d: u64, c: i64, bits: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::OutOfDomain("zero denominator".into()));
        }
        let scale = BigInt::one() << bits;
        // floor(|b|·√d·2^bits) via the integer square root of b²·d·4^bits
        let radicand = BigInt::from(b) * BigInt::from(b) * BigInt::from(d) * &scale * &scale;
        let mut root = radicand.sqrt();
        if b < 0 {
            root = -root;
        }
        let num = BigInt::from(a) * &scale + root;
        Self::from_ratio(num, BigInt::from(c) * scale)
    }

    /// Uniform on the dyadic grid `{k/2^bits : 0 ≤ k < 2^bits}`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> Self {
        let words = bits.div_ceil(32) as usize;
        let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
        let mut num = BigInt::from_slice(Sign::Plus, &digits);
        let extra = words as u64 * 32 - bits;
        num >>= extra;
        let den = BigInt::one() << bits;
        Self::from_ratio(num, den).expect("nonzero denominator")
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.den.clone())
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.num, &self.den)
    }

    /// `qα − p` rounded to double precision.
    pub fn residual(&self, p: &BigInt, q: &BigInt) -> f64 {
        ratio_to_f64(&(q * &self.num - p * &self.den), &self.den)
    }

    /// For `q`, the integer `p = ⌊qα⌋` and the fractional part `qα − p`.
    pub fn floor_and_frac(&self, q: i64) -> (BigInt, f64) {
        let prod = &self.num * q;
        let (p, rem) = prod.div_mod_floor(&self.den);
        (p, ratio_to_f64(&rem, &self.den))
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts `p/q`, a decimal such as `0.4142` or `-1.5e-3` (read
    /// exactly), or `quad:a,b,d,c` for `(a + b√d)/c` at 512 bits.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let invalid = || Error::OutOfDomain(format!("cannot parse α from {s:?}"));
        if let Some(rest) = s.strip_prefix("quad:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(invalid());
            }
            let a: i64 = parts[0].parse().map_err(|_| invalid())?;
            let b: i64 = parts[1].parse().map_err(|_| invalid())?;
            let d: u64 = parts[2].parse().map_err(|_| invalid())?;
            let c: i64 = parts[3].parse().map_err(|_| invalid())?;
            return Self::quadratic(a, b, d, c, 512);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| invalid())?;
            let d: BigInt = d.trim().parse().map_err(|_| invalid())?;
            return Self::from_ratio(n, d);
        }
        parse_decimal(s).ok_or_else(invalid)
    }
}

impl Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_decimal(s: &str) -> Option<Alpha> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if negative {
        num = -num;
    }
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let (num, den) = if shift >= 0 {
        (num * num_traits::pow(ten, shift as usize), BigInt::one())
    } else {
        (num, num_traits::pow(ten, (-shift) as usize))
    };
    Alpha::from_ratio(num, den).ok()
}

/// `n/d` rounded to double precision, for integers of any size.
pub fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let negative = n.is_negative() != d.is_negative();
    let (n, d) = (n.abs(), d.abs());
    // scale so that the integer quotient carries 64 significant bits
    let k = 64 + d.bits() as i64 - n.bits() as i64;
    let quotient = if k >= 0 { (n << k as u64) / d } else { n / (d << (-k) as u64) };
    let mut value = quotient.to_f64().unwrap_or(f64::INFINITY);
    // 2^{-k} in two steps to stay clear of intermediate underflow
    let half = k / 2;
    value *= 2f64.powi(-(half as i32));
    value *= 2f64.powi(-((k - half) as i32));
    if negative {
        -value
    } else {
        value
    }
}

/// A basis vector of `u_α ℤ²` in integer coordinates: the vector is
/// `(qα − p, q)`; `res_num = q·num − p·den` is kept exactly.
#[derive(Clone, Debug, PartialEq)]
struct ExactVector {
    p: BigInt,
    q: BigInt,
    res_num: BigInt,
}

impl ExactVector {
    fn sub_multiple(&mut self, m: &BigInt, other: &ExactVector) {
        self.p -= m * &other.p;
        self.q -= m * &other.q;
        self.res_num -= m * &other.res_num;
    }
}

/// The reduced basis of `a_s u_α ℤ²` followed along the flow.
///
/// Moving to a new flow time re-runs Lagrange reduction starting from the
/// basis reduced at the previous time, so a sweep over an increasing grid
/// costs a few reduction steps per grid point.
#[derive(Clone, Debug)]
pub struct Tracker {
    alpha: Alpha,
    basis: [ExactVector; 2],
    s: f64,
    reduced: [[f64; 2]; 2],
}

impl Tracker {
    pub fn new(alpha: &Alpha) -> Self {
        let e1 = ExactVector { p: BigInt::from(-1), q: BigInt::zero(), res_num: alpha.den.clone() };
        let e2 = ExactVector { p: BigInt::zero(), q: BigInt::one(), res_num: alpha.num.clone() };
        Tracker { alpha: alpha.clone(), basis: [e1, e2], s: 0.0, reduced: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    /// Flow time of the last reduction.
    pub fn s(&self) -> f64 {
        self.s
    }

    fn stretched(&self, v: &ExactVector, es: f64) -> [f64; 2] {
        let res = ratio_to_f64(&v.res_num, &self.alpha.den);
        let q = v.q.to_f64().unwrap_or(f64::INFINITY);
        [es * res, q / es]
    }

    /// Lagrange-reduce the basis of `a_s u_α ℤ²`; returns the two reduced
    /// vectors, shortest first.
    pub fn reduce_at(&mut self, s: f64) -> Result<[[f64; 2]; 2]> {
        let es = s.exp();
        let norm2 = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
        let mut v = [self.stretched(&self.basis[0], es), self.stretched(&self.basis[1], es)];
        for _ in 0..MAX_REDUCTION_STEPS {
            if norm2(v[0]) > norm2(v[1]) {
                v.swap(0, 1);
                self.basis.swap(0, 1);
            }
            let n0 = norm2(v[0]);
            let mu = (v[0][0] * v[1][0] + v[0][1] * v[1][1]) / n0;
            let m = mu.round();
            if m == 0.0 || !m.is_finite() {
                break;
            }
            let mut candidate = self.basis[1].clone();
            let mb = BigInt::from_f64_exact(m)?;
            candidate.sub_multiple(&mb, &self.basis[0]);
            let next = self.stretched(&candidate, es);
            if norm2(next) >= norm2(v[1]) {
                break;
            }
            self.basis[1] = candidate;
            v[1] = next;
        }
        if norm2(v[0]) > norm2(v[1]) {
            v.swap(0, 1);
            self.basis.swap(0, 1);
        }
        self.s = s;
        self.reduced = v;
        Ok(v)
    }

    /// `δ_ν(a_s u_α ℤ²)`.
    pub fn delta_at(&mut self, s: f64, norm: &NormDescriptor, critical_det: f64) -> Result<f64> {
        let (_, len) = self.shortest_at(s, norm)?;
        Ok(critical_det.sqrt() * len)
    }

    /// A shortest `ν`-vector of `a_s u_α ℤ²` and its length.
    pub fn shortest_at(&mut self, s: f64, norm: &NormDescriptor) -> Result<([f64; 2], f64)> {
        if norm.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: norm.dim() });
        }
        let [r1, r2] = self.reduce_at(s)?;
        let (_, point, len) = shortest_in_reduced(r1, r2, norm);
        Ok((point, len))
    }

    /// The current reduced basis as integer pairs `(p, q)`.
    pub fn coefficients(&self) -> [(BigInt, BigInt); 2] {
        [
            (self.basis[0].p.clone(), self.basis[0].q.clone()),
            (self.basis[1].p.clone(), self.basis[1].q.clone()),
        ]
    }

    pub fn reduced(&self) -> [[f64; 2]; 2] {
        self.reduced
    }
}

trait FromF64Exact: Sized {
    fn from_f64_exact(x: f64) -> Result<Self>;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(x: f64) -> Result<Self> {
        num_traits::FromPrimitive::from_f64(x)
            .ok_or_else(|| Error::Numeric(format!("reduction multiplier {x} is not an integer")))
    }
}
