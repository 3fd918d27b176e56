//! Approximation functions `ψ`, the Dani correspondence `ψ ↦ r(s)` and the
//! convergence series that separate the Euclidean and sup-norm zero-one laws.
//!
//! The correspondence is
//! `r((mn/d)·ln(t/ψ(t))) = t^{n/d}·ψ(t)^{m/d}` with `d = m + n`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-spaced sample count used for the monotonicity checks.
pub const MONOTONE_SAMPLES: usize = 1000;

const BISECTION_TOL: f64 = 1e-12;
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PsiFamily {
    /// `c·t^{−n/m}`.
    Scaled { c: f64 },
    /// `1/t − 1/t^{k+1}`.
    PowerGap { k: f64 },
    /// `1/t − 1/(t·(ln t)^k)`.
    LogGap { k: f64 },
    /// Piecewise-linear interpolation of `(ts, values)`.
    Tabulated { ts: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSpec {
    pub family: PsiFamily,
    pub t_start: f64,
    pub m: u32,
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesClass {
    Convergent,
    Divergent,
    Unknown,
}

impl fmt::Display for SeriesClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SeriesClass::Convergent => "convergent",
            SeriesClass::Divergent => "divergent",
            SeriesClass::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

fn default_t_start(family: &PsiFamily) -> f64 {
    match family {
        PsiFamily::Scaled { .. } => 1.0,
        PsiFamily::PowerGap { k } => 2.0_f64.max((k + 2.0).powf(1.0 / k)),
        PsiFamily::LogGap { .. } => std::f64::consts::E * std::f64::consts::E,
        PsiFamily::Tabulated { ts, .. } => ts.first().copied().unwrap_or(1.0),
    }
}

impl PsiSpec {
    /// A validated specification; `t_start = None` picks the family default.
    pub fn new(family: PsiFamily, t_start: Option<f64>, m: u32, n: u32) -> Result<Self> {
        let t_start = t_start.unwrap_or_else(|| default_t_start(&family));
        let spec = PsiSpec { family, t_start, m, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn scaled(c: f64) -> Result<Self> {
        Self::new(PsiFamily::Scaled { c }, None, 1, 1)
    }

    pub fn power_gap(k: f64) -> Result<Self> {
        Self::new(PsiFamily::PowerGap { k }, None, 1, 1)
    }

    pub fn log_gap(k: f64) -> Result<Self> {
        Self::new(PsiFamily::LogGap { k }, None, 1, 1)
    }

    pub fn tabulated(ts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(PsiFamily::Tabulated { ts, values }, None, 1, 1)
    }

    /// Parse `scaled:c=0.9`, `powergap:k=1` or `loggap:k=2`, optionally
    /// followed by `,t_start=<x>`.
    pub fn parse(text: &str, m: u32, n: u32) -> Result<Self> {
        let (kind, params) = text.split_once(':').unwrap_or((text, ""));
        let mut value = None;
        let mut t_start = None;
        for item in params.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidPsi(format!("expected key=value, got {item:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPsi(format!("not a number: {v:?}")))?;
            match key.trim() {
                "t_start" => t_start = Some(v),
                "c" | "k" => value = Some((key.trim().to_string(), v)),
                other => return Err(Error::InvalidPsi(format!("unknown parameter {other:?}"))),
            }
        }
        let need = |name: &str| -> Result<f64> {
            match &value {
                Some((k, v)) if k == name => Ok(*v),
                _ => Err(Error::InvalidPsi(format!("{kind} needs {name}=<value>"))),
            }
        };
        let family = match kind.trim() {
            "scaled" => PsiFamily::Scaled { c: need("c")? },
            "powergap" => PsiFamily::PowerGap { k: need("k")? },
            "loggap" => PsiFamily::LogGap { k: need("k")? },
            other => return Err(Error::InvalidPsi(format!("unknown family {other:?}"))),
        };
        Self::new(family, t_start, m, n)
    }

    /// Short identifier, e.g. `loggap:k=1`.
    pub fn id(&self) -> String {
        match &self.family {
            PsiFamily::Scaled { c } => format!("scaled:c={c}"),
            PsiFamily::PowerGap { k } => format!("powergap:k={k}"),
            PsiFamily::LogGap { k } => format!("loggap:k={k}"),
            PsiFamily::Tabulated { ts, .. } => format!("table:{}", ts.len()),
        }
    }

    pub fn d(&self) -> u32 {
        self.m + self.n
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidPsi("m and n must be positive".into()));
        }
        if !(self.t_start.is_finite() && self.t_start >= 1.0) {
            return Err(Error::InvalidPsi(format!("t_start must be ≥ 1, got {}", self.t_start)));
        }
        match &self.family {
            PsiFamily::Scaled { c } if !(c.is_finite() && *c > 0.0) => {
                return Err(Error::InvalidPsi(format!("scale must be positive, got {c}")));
            }
            PsiFamily::PowerGap { k } | PsiFamily::LogGap { k } if !(k.is_finite() && *k > 0.0) => {
                return Err(Error::InvalidPsi(format!("exponent must be positive, got {k}")));
            }
            PsiFamily::Tabulated { ts, values } => {
                if ts.len() < 2 || ts.len() != values.len() {
                    return Err(Error::InvalidPsi("a table needs at least two (t, ψ) rows".into()));
                }
                if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidPsi("table abscissae must be strictly increasing".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidPsi("table values must be positive".into()));
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidPsi("table values must be non-increasing".into()));
                }
                if self.t_start < ts[0] || self.t_start >= *ts.last().unwrap() {
                    return Err(Error::InvalidPsi("t_start lies outside the table".into()));
                }
            }
            _ => {}
        }
        if let PsiFamily::LogGap { .. } = self.family {
            if self.t_start <= std::f64::consts::E {
                return Err(Error::InvalidPsi("loggap needs t_start > e".into()));
            }
        }
        // non-increasing, positive on the sampled domain
        let ts = self.log_samples(MONOTONE_SAMPLES);
        let mut prev = f64::INFINITY;
        for &t in &ts {
            let v = self.eval(t)?;
            if !(v > 0.0) {
                return Err(Error::InvalidPsi(format!("ψ({t}) = {v} is not positive")));
            }
            if v > prev * (1.0 + 1e-12) {
                return Err(Error::InvalidPsi(format!("ψ increases near t = {t}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// Upper end of the range sampled by the validity checks: the last
    /// table row, or `t_start·10⁸`.
    pub fn t_end(&self) -> f64 {
        match &self.family {
            PsiFamily::Tabulated { ts, .. } => *ts.last().unwrap(),
            _ => self.t_start * 1e8,
        }
    }

    fn log_samples(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.t_start.ln(), self.t_end().ln());
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let lo = self.t_start * (1.0 - DOMAIN_SLACK);
        let hi = match &self.family {
            PsiFamily::Tabulated { ts, .. } => *ts.last().unwrap() * (1.0 + DOMAIN_SLACK),
            _ => f64::INFINITY,
        };
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain(format!("t = {t} outside [{}, {hi}]", self.t_start)));
        }
        Ok(())
    }

    /// `ψ(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match &self.family {
            PsiFamily::Scaled { c } => c * t.powf(-(self.n as f64) / self.m as f64),
            PsiFamily::PowerGap { k } => (1.0 - t.powf(-k)) / t,
            PsiFamily::LogGap { k } => (1.0 - t.ln().powf(-k)) / t,
            PsiFamily::Tabulated { ts, values } => interpolate(ts, values, t),
        })
    }

    /// `1 − tψ(t)`, evaluated without cancellation for the gap families.
    pub fn one_minus_t_psi(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match &self.family {
            PsiFamily::PowerGap { k } => t.powf(-k),
            PsiFamily::LogGap { k } => t.ln().powf(-k),
            _ => 1.0 - t * self.eval(t)?,
        })
    }

    /// `ln(tψ(t))`.
    pub fn ln_t_psi(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match &self.family {
            PsiFamily::PowerGap { .. } | PsiFamily::LogGap { .. } => (-self.one_minus_t_psi(t)?).ln_1p(),
            PsiFamily::Scaled { c } => c.ln() + (1.0 - self.n as f64 / self.m as f64) * t.ln(),
            PsiFamily::Tabulated { .. } => (t * self.eval(t)?).ln(),
        })
    }

    /// Flow time `s(t) = (mn/d)·ln(t/ψ(t))`.
    pub fn s_of_t(&self, t: f64) -> Result<f64> {
        let (m, n, d) = (self.m as f64, self.n as f64, self.d() as f64);
        Ok(m * n / d * (2.0 * t.ln() - self.ln_t_psi(t)?))
    }

    /// `ln r` at the flow time of `t`: `(n/d)·ln t + (m/d)·ln ψ(t)`.
    pub fn ln_r_of_t(&self, t: f64) -> Result<f64> {
        let (m, n, d) = (self.m as f64, self.n as f64, self.d() as f64);
        Ok(m / d * self.ln_t_psi(t)? + (n - m) / d * t.ln())
    }

    /// Check that `tψ(t)` is non-decreasing and below 1 on the sampled
    /// domain (the hypothesis of the Euclidean zero-one law).
    pub fn check_monotone_product(&self) -> Result<()> {
        self.check_product(true)
    }

    /// Only the monotonicity half of [`Self::check_monotone_product`].
    pub fn check_product_non_decreasing(&self) -> Result<()> {
        self.check_product(false)
    }

    fn check_product(&self, below_one: bool) -> Result<()> {
        if self.m != 1 || self.n != 1 {
            return Err(Error::Hypothesis("the monotone-product condition is stated for m = n = 1".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for t in self.log_samples(MONOTONE_SAMPLES) {
            let gap = self.one_minus_t_psi(t)?;
            if below_one && !(gap > 0.0) {
                return Err(Error::Hypothesis(format!("tψ(t) ≥ 1 at t = {t}")));
            }
            let prod = 1.0 - gap;
            if prod < prev - 1e-12 {
                return Err(Error::Hypothesis(format!("tψ(t) decreases near t = {t}")));
            }
            prev = prod;
        }
        Ok(())
    }
}

fn interpolate(ts: &[f64], values: &[f64], t: f64) -> f64 {
    let n = ts.len();
    if t <= ts[0] {
        return values[0];
    }
    if t >= ts[n - 1] {
        return values[n - 1];
    }
    let i = ts.partition_point(|&x| x <= t) - 1;
    let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// The target radius `r(s)` attached to `ψ` by the Dani correspondence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFunction {
    pub psi: PsiSpec,
    pub s_start: f64,
}

impl RateFunction {
    pub fn new(psi: PsiSpec) -> Result<Self> {
        let s_start = psi.s_of_t(psi.t_start)?;
        // t/ψ(t) must be strictly increasing for s ↦ t to be well defined
        let mut prev = f64::NEG_INFINITY;
        for t in psi.log_samples(MONOTONE_SAMPLES) {
            let s = psi.s_of_t(t)?;
            if !(s > prev) {
                return Err(Error::InvalidPsi(format!("t/ψ(t) is not increasing near t = {t}")));
            }
            prev = s;
        }
        Ok(RateFunction { psi, s_start })
    }

    /// The closed-form constant for the scaled family, `c^{m/d}`.
    pub fn constant(&self) -> Option<f64> {
        match self.psi.family {
            PsiFamily::Scaled { c } => Some(c.powf(self.psi.m as f64 / self.psi.d() as f64)),
            _ => None,
        }
    }

    /// The `t` with `s(t) = s`, by bisection in `ln t`.
    pub fn t_of_s(&self, s: f64) -> Result<f64> {
        let psi = &self.psi;
        if s < self.s_start - 1e-12 {
            return Err(Error::OutOfDomain(format!("s = {s} precedes s_start = {}", self.s_start)));
        }
        if s <= self.s_start {
            return Ok(psi.t_start);
        }
        let (m, n, d) = (psi.m as f64, psi.n as f64, psi.d() as f64);
        let lo0 = psi.t_start.ln();
        // s(t) − s_start ≥ (mn/d)·ln(t/t_start) because ψ is non-increasing
        let mut hi = lo0 + d * (s - self.s_start) / (m * n) + 1e-9;
        let t_max = match &psi.family {
            PsiFamily::Tabulated { ts, .. } => ts.last().unwrap().ln(),
            _ => 690.0,
        };
        let mut expansions = 0;
        while psi.s_of_t(hi.min(t_max).exp())? < s {
            if hi >= t_max {
                return Err(Error::OutOfDomain(format!("s = {s} lies beyond the domain of ψ")));
            }
            hi = lo0 + 2.0 * (hi - lo0);
            expansions += 1;
            if expansions > 64 {
                return Err(Error::RootNotBracketed(format!("s(t) = {s}")));
            }
        }
        let mut hi = hi.min(t_max);
        let mut lo = lo0;
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if psi.s_of_t(mid.exp())? < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// `r(s)`.
    pub fn r(&self, s: f64) -> Result<f64> {
        if s < self.s_start - 1e-12 {
            return Err(Error::OutOfDomain(format!("s = {s} precedes s_start = {}", self.s_start)));
        }
        if let Some(c) = self.constant() {
            return Ok(c);
        }
        let t = self.t_of_s(s)?;
        Ok(self.psi.ln_r_of_t(t)?.exp())
    }

    /// `1 − r(s)`, without the cancellation of `1 − r` when `r` is near 1.
    pub fn one_minus_r(&self, s: f64) -> Result<f64> {
        if s < self.s_start - 1e-12 {
            return Err(Error::OutOfDomain(format!("s = {s} precedes s_start = {}", self.s_start)));
        }
        if let Some(c) = self.constant() {
            return Ok(1.0 - c);
        }
        let t = self.t_of_s(s)?;
        Ok(-self.psi.ln_r_of_t(t)?.exp_m1())
    }

    /// `r` on a grid of flow times.
    pub fn r_grid(&self, s: &[f64]) -> Result<Vec<f64>> {
        s.iter().map(|&x| self.r(x)).collect()
    }
}

/// `a_s = diag(e^{s/m} I_m, e^{−s/n} I_n)`.
pub fn a_s(s: f64, m: u32, n: u32) -> DMatrix<f64> {
    let d = (m + n) as usize;
    DMatrix::from_fn(d, d, |i, j| {
        if i != j {
            0.0
        } else if i < m as usize {
            (s / m as f64).exp()
        } else {
            (-s / n as f64).exp()
        }
    })
}

/// `b_t = diag((t/ψ)^{n/d} I_m, (ψ/t)^{m/d} I_n)`.
pub fn b_t(psi: &PsiSpec, t: f64) -> Result<DMatrix<f64>> {
    let (m, n) = (psi.m as usize, psi.n as usize);
    let d = (m + n) as f64;
    let ratio = t / psi.eval(t)?;
    let top = ratio.powf(n as f64 / d);
    let bottom = ratio.powf(-(m as f64) / d);
    Ok(DMatrix::from_fn(m + n, m + n, |i, j| {
        if i != j {
            0.0
        } else if i < m {
            top
        } else {
            bottom
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSums {
    pub euclidean: f64,
    pub supnorm: f64,
}

/// Partial sums from `k₀ = ⌈t_start⌉` to `K` of `1/k − ψ(k)` and of
/// `−ln(1 − kψ(k))·(1/k − ψ(k))`.
pub fn series_partial_sums(psi: &PsiSpec, k_max: u64) -> Result<SeriesSums> {
    if psi.m != 1 || psi.n != 1 {
        return Err(Error::Unsupported("series comparisons need m = n = 1".into()));
    }
    let k0 = psi.t_start.ceil() as u64;
    let (mut euclidean, mut supnorm) = (0.0, 0.0);
    for k in k0..=k_max {
        let kf = k as f64;
        let gap_k = psi.one_minus_t_psi(kf)?;
        if !(gap_k > 0.0) {
            return Err(Error::Hypothesis(format!("kψ(k) ≥ 1 at k = {k}")));
        }
        let term = gap_k / kf;
        euclidean += term;
        supnorm += -gap_k.ln() * term;
    }
    Ok(SeriesSums { euclidean, supnorm })
}

/// Closed-form classification of `Σ(1/k − ψ(k))`.
pub fn classify_series(psi: &PsiSpec) -> SeriesClass {
    match psi.family {
        PsiFamily::PowerGap { .. } => SeriesClass::Convergent,
        PsiFamily::LogGap { k } => {
            if k <= 1.0 {
                SeriesClass::Divergent
            } else {
                SeriesClass::Convergent
            }
        }
        PsiFamily::Scaled { c } if psi.m == psi.n && c < 1.0 => SeriesClass::Divergent,
        _ => SeriesClass::Unknown,
    }
}
