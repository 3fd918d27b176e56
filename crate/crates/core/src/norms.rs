//! Symmetric convex norms on the plane (and sup/Euclidean norms up to
//! dimension four).
//!
//! A [`NormDescriptor`] is an immutable value: construction validates the
//! input and caches everything the hot paths need (polygon facet
//! functionals, the periodic spline of a radial body, the norm-equivalence
//! constants against the Euclidean norm).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of angular samples accepted for a radial body.
pub const MIN_RADIAL_SAMPLES: usize = 8;

/// Angles used when the equivalence constants have to be found numerically.
pub const EQUIVALENCE_GRID: usize = 4096;

const CONVEXITY_PROBE_POINTS: usize = 4096;

/// The kind of unit ball, in the JSON shape used on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormSpec {
    Sup {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Euclidean {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Lp {
        p: f64,
    },
    /// Vertices of one half of the polygon in counterclockwise order; the
    /// other half is the mirror image through the origin.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    /// Radial function sampled on `[0, π)`.
    Radial {
        angles: Vec<f64>,
        radii: Vec<f64>,
    },
}

fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug)]
enum Body {
    Sup,
    Euclidean,
    Lp(f64),
    Polygon(Polygon),
    Radial(RadialSpline),
}

#[derive(Clone, Debug)]
struct Polygon {
    /// Full vertex cycle, counterclockwise, collinear vertices removed.
    vertices: Vec<[f64; 2]>,
    /// One functional per edge; the gauge is the maximum of `g·x`.
    facets: Vec<[f64; 2]>,
}

/// Periodic monotone cubic (PCHIP) interpolant of the radial function.
#[derive(Clone, Debug)]
struct RadialSpline {
    angles: Vec<f64>,
    radii: Vec<f64>,
    slopes: Vec<f64>,
}

/// A validated norm together with its cached evaluation data.
#[derive(Clone, Debug)]
pub struct NormDescriptor {
    spec: NormSpec,
    dim: usize,
    body: Body,
    kappa: (f64, f64),
}

impl PartialEq for NormDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Serialize for NormDescriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = NormSpec::deserialize(deserializer)?;
        NormDescriptor::new(spec).map_err(serde::de::Error::custom)
    }
}

impl NormDescriptor {
    pub fn new(spec: NormSpec) -> Result<Self> {
        let (dim, body) = match &spec {
            NormSpec::Sup { dim } => (check_dim(*dim)?, Body::Sup),
            NormSpec::Euclidean { dim } => (check_dim(*dim)?, Body::Euclidean),
            NormSpec::Lp { p } => {
                if !p.is_finite() || *p < 1.0 {
                    return Err(Error::InvalidNorm(format!("lp exponent must be finite and >= 1, got {p}")));
                }
                (2, Body::Lp(*p))
            }
            NormSpec::Polygon { vertices } => (2, Body::Polygon(Polygon::new(vertices)?)),
            NormSpec::Radial { angles, radii } => (2, Body::Radial(RadialSpline::new(angles, radii)?)),
        };
        let mut norm = NormDescriptor { spec, dim, body, kappa: (1.0, 1.0) };
        norm.kappa = norm.compute_equivalence_constants();
        if let Body::Radial(_) = norm.body {
            norm.check_radial_convexity()?;
        }
        Ok(norm)
    }

    pub fn sup(dim: usize) -> Result<Self> {
        Self::new(NormSpec::Sup { dim })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(NormSpec::Euclidean { dim })
    }

    pub fn lp(p: f64) -> Result<Self> {
        Self::new(NormSpec::Lp { p })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(NormSpec::Polygon { vertices })
    }

    pub fn radial(angles: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        Self::new(NormSpec::Radial { angles, radii })
    }

    /// Planar sup norm.
    pub fn sup2() -> Self {
        Self::sup(2).expect("dimension 2 is valid")
    }

    /// Planar Euclidean norm.
    pub fn euclidean2() -> Self {
        Self::euclidean(2).expect("dimension 2 is valid")
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.body, Body::Euclidean)
    }

    pub fn is_sup(&self) -> bool {
        matches!(self.body, Body::Sup)
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match &self.spec {
            NormSpec::Sup { dim } => format!("sup{dim}"),
            NormSpec::Euclidean { dim } => format!("euclidean{dim}"),
            NormSpec::Lp { p } => format!("l{p}"),
            NormSpec::Polygon { vertices } => format!("polygon{}", 2 * vertices.len()),
            NormSpec::Radial { angles, .. } => format!("radial{}", angles.len()),
        }
    }

    /// Whether the planar unit ball is a parallelogram.
    pub fn is_parallelogram(&self) -> bool {
        match &self.body {
            Body::Sup => self.dim == 2,
            Body::Lp(p) => *p == 1.0,
            Body::Polygon(poly) => poly.vertices.len() == 4,
            _ => false,
        }
    }

    /// Gauge of `x` with respect to the unit ball.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(match &self.body {
            Body::Sup => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            Body::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            _ => self.eval2([x[0], x[1]]),
        })
    }

    /// Planar gauge without the dimension check. Only meaningful when
    /// `self.dim() == 2`.
    #[inline]
    pub fn eval2(&self, x: [f64; 2]) -> f64 {
        debug_assert_eq!(self.dim, 2);
        match &self.body {
            Body::Sup => x[0].abs().max(x[1].abs()),
            Body::Euclidean => (x[0] * x[0] + x[1] * x[1]).sqrt(),
            Body::Lp(p) => lp_gauge(*p, x),
            Body::Polygon(poly) => poly.gauge(x),
            Body::Radial(spline) => {
                let len = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if len == 0.0 {
                    0.0
                } else {
                    len / spline.radius(x[1].atan2(x[0]))
                }
            }
        }
    }

    /// Radius `r_θ` of the unit circle of the norm in direction `θ`.
    pub fn radius_at(&self, theta: f64) -> Result<f64> {
        self.require_planar()?;
        let (s, c) = theta.sin_cos();
        Ok(match &self.body {
            Body::Euclidean => 1.0,
            Body::Sup => 1.0 / c.abs().max(s.abs()),
            Body::Lp(p) => 1.0 / lp_gauge(*p, [c, s]),
            Body::Polygon(poly) => 1.0 / poly.gauge([c, s]),
            Body::Radial(spline) => spline.radius(theta),
        })
    }

    /// The boundary point `r_θ (cos θ, sin θ)`.
    pub fn boundary_point(&self, theta: f64) -> Result<[f64; 2]> {
        let r = self.radius_at(theta)?;
        let (s, c) = theta.sin_cos();
        Ok([r * c, r * s])
    }

    /// Constants `(κ₁, κ₂)` with `κ₁‖x‖₂ ≤ ν(x) ≤ κ₂‖x‖₂`.
    ///
    /// Exact for the sup, Euclidean and ℓp norms; for polygons and radial
    /// bodies they come from a 4096-angle scan rounded outward by 1%.
    pub fn equivalence_constants(&self) -> (f64, f64) {
        self.kappa
    }

    /// Area of the planar unit ball by polar quadrature `½∮ r(θ)² dθ`
    /// with `samples` midpoint nodes on `[0, 2π)`.
    pub fn ball_area(&self, samples: usize) -> Result<f64> {
        self.require_planar()?;
        let h = 2.0 * PI / samples as f64;
        let mut acc = 0.0;
        for i in 0..samples {
            let r = self.radius_at((i as f64 + 0.5) * h)?;
            acc += r * r;
        }
        Ok(0.5 * acc * h)
    }

    /// Exact area of the unit ball where a closed form is available.
    pub fn exact_area(&self) -> Option<f64> {
        match &self.body {
            Body::Sup if self.dim == 2 => Some(4.0),
            Body::Euclidean if self.dim == 2 => Some(PI),
            Body::Lp(p) if *p == 1.0 => Some(2.0),
            Body::Polygon(poly) => Some(poly.area()),
            _ => None,
        }
    }

    fn require_planar(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.dim });
        }
        Ok(())
    }

    fn compute_equivalence_constants(&self) -> (f64, f64) {
        let d = self.dim as f64;
        match &self.body {
            Body::Euclidean => (1.0, 1.0),
            Body::Sup => (1.0 / d.sqrt(), 1.0),
            Body::Lp(p) => {
                // ‖x‖_p vs ‖x‖_2 in the plane: the extremes sit on the axes
                // and on the diagonals.
                let diag = 2.0_f64.powf(1.0 / p - 0.5);
                if *p >= 2.0 {
                    (diag, 1.0)
                } else {
                    (1.0, diag)
                }
            }
            Body::Polygon(_) | Body::Radial(_) => {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0_f64;
                for i in 0..EQUIVALENCE_GRID {
                    let theta = PI * i as f64 / EQUIVALENCE_GRID as f64;
                    let (s, c) = theta.sin_cos();
                    let g = self.eval2([c, s]);
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
                (lo * 0.99, hi * 1.01)
            }
        }
    }

    fn check_radial_convexity(&self) -> Result<()> {
        let n = CONVEXITY_PROBE_POINTS;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| self.boundary_point(2.0 * PI * i as f64 / n as f64))
            .collect::<Result<_>>()?;
        let scale = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).fold(0.0, f64::max);
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let c = pts[(i + 2) % n];
            let turn = cross(sub(b, a), sub(c, b));
            if turn < -1e-9 * scale / (n * n) as f64 {
                return Err(Error::InvalidNorm(format!(
                    "radial body is not convex near angle {:.6}",
                    2.0 * PI * ((i + 1) % n) as f64 / n as f64
                )));
            }
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<usize> {
    if (2..=4).contains(&dim) {
        Ok(dim)
    } else {
        Err(Error::InvalidNorm(format!("dimension must be between 2 and 4, got {dim}")))
    }
}

#[inline]
fn lp_gauge(p: f64, x: [f64; 2]) -> f64 {
    let a = x[0].abs();
    let b = x[1].abs();
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return a + b;
    }
    if p == 2.0 {
        return (a * a + b * b).sqrt();
    }
    m * ((a / m).powf(p) + (b / m).powf(p)).powf(1.0 / p)
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Polygon {
    fn new(input: &[[f64; 2]]) -> Result<Self> {
        if input.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidNorm("polygon vertices must be finite".into()));
        }
        // Accept a full symmetric cycle as well as one half of it.
        let half: Vec<[f64; 2]> = if input.len().is_multiple_of(2) && input.len() >= 4 && is_mirrored(input) {
            input[..input.len() / 2].to_vec()
        } else {
            input.to_vec()
        };
        if half.len() < 2 {
            return Err(Error::InvalidNorm("polygon needs at least two vertices per half".into()));
        }
        let mut cycle = half.clone();
        cycle.extend(half.iter().map(|v| [-v[0], -v[1]]));

        // Drop vertices that sit on a straight edge.
        let n = cycle.len();
        let scale = cycle.iter().map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::InvalidNorm("polygon is degenerate".into()));
        }
        let tol = 1e-12 * scale * scale;
        let mut vertices = Vec::with_capacity(n);
        for i in 0..n {
            let prev = cycle[(i + n - 1) % n];
            let cur = cycle[i];
            let next = cycle[(i + 1) % n];
            let turn = cross(sub(cur, prev), sub(next, cur));
            if turn < -tol {
                return Err(Error::InvalidNorm(
                    "polygon vertices must be in counterclockwise order and form a convex set".into(),
                ));
            }
            if turn > tol {
                vertices.push(cur);
            }
        }
        if vertices.len() < 4 {
            return Err(Error::InvalidNorm("polygon has empty interior".into()));
        }
        // A convex cycle turns exactly once around the origin.
        let mut winding = 0.0;
        for i in 0..vertices.len() {
            let a = vertices[i];
            let b = vertices[(i + 1) % vertices.len()];
            winding += cross(a, b).atan2(a[0] * b[0] + a[1] * b[1]);
        }
        if (winding - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidNorm("polygon does not wind once around the origin".into()));
        }
        let mut facets = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let a = vertices[i];
            let b = vertices[(i + 1) % vertices.len()];
            let normal = [b[1] - a[1], a[0] - b[0]];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            if offset <= tol {
                return Err(Error::InvalidNorm("origin is not an interior point of the polygon".into()));
            }
            facets.push([normal[0] / offset, normal[1] / offset]);
        }
        Ok(Polygon { vertices, facets })
    }

    #[inline]
    fn gauge(&self, x: [f64; 2]) -> f64 {
        self.facets
            .iter()
            .map(|g| g[0] * x[0] + g[1] * x[1])
            .fold(0.0, f64::max)
    }

    fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }
}

fn is_mirrored(v: &[[f64; 2]]) -> bool {
    let k = v.len() / 2;
    (0..k).all(|i| {
        let a = v[i];
        let b = v[i + k];
        (a[0] + b[0]).abs() <= 1e-12 * (1.0 + a[0].abs()) && (a[1] + b[1]).abs() <= 1e-12 * (1.0 + a[1].abs())
    })
}

impl RadialSpline {
    fn new(angles: &[f64], radii: &[f64]) -> Result<Self> {
        if angles.len() != radii.len() {
            return Err(Error::InvalidNorm("angles and radii differ in length".into()));
        }
        if angles.len() < MIN_RADIAL_SAMPLES {
            return Err(Error::InvalidNorm(format!(
                "radial body needs at least {MIN_RADIAL_SAMPLES} angles, got {}",
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite() || *a < 0.0 || *a >= PI) {
            return Err(Error::InvalidNorm("radial angles must lie in [0, π)".into()));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidNorm("radial angles must be strictly increasing".into()));
        }
        if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidNorm("radii must be positive".into()));
        }
        let n = angles.len();
        let gap = |i: usize| -> f64 {
            // width of the interval starting at node i (cyclic, period π)
            if i + 1 < n {
                angles[i + 1] - angles[i]
            } else {
                angles[0] + PI - angles[n - 1]
            }
        };
        let secant = |i: usize| -> f64 { (radii[(i + 1) % n] - radii[i]) / gap(i) };
        let slopes = (0..n)
            .map(|i| {
                let im = (i + n - 1) % n;
                let (h0, h1) = (gap(im), gap(i));
                let (d0, d1) = (secant(im), secant(i));
                if d0 * d1 <= 0.0 {
                    0.0
                } else {
                    let w0 = 2.0 * h1 + h0;
                    let w1 = h1 + 2.0 * h0;
                    (w0 + w1) / (w0 / d0 + w1 / d1)
                }
            })
            .collect();
        Ok(RadialSpline { angles: angles.to_vec(), radii: radii.to_vec(), slopes })
    }

    fn radius(&self, theta: f64) -> f64 {
        let n = self.angles.len();
        let mut t = theta.rem_euclid(PI);
        // Locate the interval [θ_i, θ_{i+1}) containing t, wrapping past π.
        let i = match self.angles.partition_point(|a| *a <= t) {
            0 => {
                t += PI;
                n - 1
            }
            k => k - 1,
        };
        let (t0, t1) = if i + 1 < n {
            (self.angles[i], self.angles[i + 1])
        } else {
            (self.angles[n - 1], self.angles[0] + PI)
        };
        let h = t1 - t0;
        let u = (t - t0) / h;
        let (r0, r1) = (self.radii[i], self.radii[(i + 1) % n]);
        let (m0, m1) = (self.slopes[i], self.slopes[(i + 1) % n]);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * r0
            + (u3 - 2.0 * u2 + u) * h * m0
            + (-2.0 * u3 + 3.0 * u2) * r1
            + (u3 - u2) * h * m1
    }
}

/// Unit square `(±1, ±1)` as a polygon descriptor.
pub fn unit_square() -> NormDescriptor {
    NormDescriptor::polygon(vec![[1.0, -1.0], [1.0, 1.0]]).expect("square is valid")
}

/// Radial samples of the disk of radius `rho`.
pub fn sampled_disk(rho: f64, samples: usize) -> Result<NormDescriptor> {
    let angles = (0..samples).map(|i| PI * i as f64 / samples as f64).collect();
    NormDescriptor::radial(angles, vec![rho; samples])
}
