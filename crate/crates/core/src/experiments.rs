//! Monte-Carlo checks of the Euclidean zero-one law, the explicit
//! construction of a non-Dirichlet number for any `ψ` below `1/t`, and
//! side-by-side tables of the Euclidean and sup-norm convergence series.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{bits_for_horizon, ratio_to_f64, Alpha, Tracker};
use crate::dani::{classify_series, series_partial_sums, PsiSpec, RateFunction, SeriesClass};
use crate::error::{Error, Result};
use crate::flow::{flow_grid, hits_on_grid, DEFAULT_GRID_STEP};
use crate::hyperbolic::EUCLIDEAN_DELTA;
use crate::norms::NormDescriptor;
use crate::numfmt::sig12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroOneReport {
    pub psi: PsiSpec,
    pub psi_id: String,
    pub n_samples: usize,
    pub windows: Vec<[f64; 2]>,
    pub hit_counts: Vec<usize>,
    pub hit_fraction: Vec<f64>,
    pub classification: SeriesClass,
    pub seed: u64,
    pub grid_step: f64,
}

/// For `n` seeded uniform `α ∈ [0, 1)` and each window `[S, 2S]`, the
/// fraction of `α` whose Euclidean trajectory hits the target `K(r(s))`
/// somewhere in the window.
///
/// Sample `i` draws from its own ChaCha stream `(seed, i)`, so the report
/// does not depend on the thread count.
pub fn zero_one_experiment(psi: &PsiSpec, n: usize, windows: &[f64], seed: u64, grid_step: f64) -> Result<ZeroOneReport> {
    psi.check_product_non_decreasing()?;
    if windows.is_empty() || windows.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::OutOfDomain("windows must be positive flow times".into()));
    }
    let rate = RateFunction::new(psi.clone())?;
    let s_lo = windows.iter().copied().fold(f64::INFINITY, f64::min);
    let s_hi = 2.0 * windows.iter().copied().fold(0.0, f64::max);
    if s_lo < rate.s_start {
        return Err(Error::OutOfDomain(format!("window start {s_lo} precedes s_start = {}", rate.s_start)));
    }
    let grid = flow_grid(s_lo, s_hi, grid_step)?;
    let r: Vec<f64> = grid.par_iter().map(|&s| rate.r(s)).collect::<Result<_>>()?;
    let norm = NormDescriptor::euclidean2();
    let bits = bits_for_horizon(s_hi);

    let per_sample: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let alpha = Alpha::random(&mut rng, bits);
            let hits = hits_on_grid(&alpha, &rate, &norm, EUCLIDEAN_DELTA, &grid, &r)?;
            Ok(windows
                .iter()
                .map(|&w| hits.iter().any(|h| h.s_hi >= w && h.s_lo <= 2.0 * w))
                .collect())
        })
        .collect::<Result<_>>()?;

    let hit_counts: Vec<usize> = (0..windows.len())
        .map(|j| per_sample.iter().filter(|row| row[j]).count())
        .collect();
    Ok(ZeroOneReport {
        psi: psi.clone(),
        psi_id: psi.id(),
        n_samples: n,
        windows: windows.iter().map(|&w| [w, 2.0 * w]).collect(),
        hit_fraction: hit_counts.iter().map(|&c| c as f64 / n.max(1) as f64).collect(),
        hit_counts,
        classification: classify_series(psi),
        seed,
        grid_step,
    })
}

/// Default zero-one protocol: grid step 0.01.
pub fn zero_one_default(psi: &PsiSpec, n: usize, windows: &[f64], seed: u64) -> Result<ZeroOneReport> {
    zero_one_experiment(psi, n, windows, seed, DEFAULT_GRID_STEP)
}

/// Standard error of a binomial proportion.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub const ZERO_ONE_CSV_HEADER: &str = "window_lo,window_hi,hit_fraction,n,psi_id,classification";

pub fn zero_one_csv(report: &ZeroOneReport) -> String {
    let mut out = String::from(ZERO_ONE_CSV_HEADER);
    out.push('\n');
    for (w, f) in report.windows.iter().zip(&report.hit_fraction) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig12(w[0]),
            sig12(w[1]),
            sig12(*f),
            report.n_samples,
            report.psi_id,
            report.classification
        ));
    }
    out
}

/// Inner-ball constant of the ball sandwich around the critical point.
pub const INNER_BALL_CONSTANT: f64 = 1.8;
/// Cap on the per-stage target gap `1 − r(s_k)`.
pub const EPSILON_CAP: f64 = 0.05;
const MAX_CANDIDATES: usize = 256;
const MAX_SHIFT_DOUBLINGS: u32 = 96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub gamma: [[i128; 2]; 2],
    pub s_k: f64,
    pub interval: [f64; 2],
    /// The interval endpoints as exact fractions.
    pub interval_exact: [String; 2],
    pub achieved_delta: f64,
    pub r_required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCertificate {
    pub psi: String,
    pub alpha: f64,
    pub alpha_exact: Alpha,
    pub depth: usize,
    pub seed_interval: [f64; 2],
    pub stages: Vec<Stage>,
}

/// A candidate orbit point `γz₀` with `γ = [[a, b], [c, d]]`.
#[derive(Clone, Debug)]
struct OrbitPoint {
    gamma: [[BigInt; 2]; 2],
    n: BigInt,
    re: BigRational,
}

impl OrbitPoint {
    fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        let n = &c * &c - &c * &d + &d * &d;
        let two = BigInt::from(2);
        let num = &two * &a * &c + &two * &b * &d - &a * &d - &b * &c;
        let re = BigRational::new(num, &two * &n);
        OrbitPoint { gamma: [[a, b], [c, d]], n, re }
    }

    fn im(&self) -> f64 {
        EUCLIDEAN_DELTA / self.n.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// The rational with the smallest denominator in the open interval `(l, u)`.
pub fn simplest_between(l: &BigRational, u: &BigRational) -> BigRational {
    debug_assert!(l < u);
    let fl = l.floor();
    let next = &fl + BigRational::one();
    if &next < u {
        // an integer lies in (l, u); take the one closest to zero
        let zero = BigRational::zero();
        if l < &zero && &zero < u {
            return zero;
        }
        return if l.is_negative() { u.ceil() - BigRational::one() } else { next };
    }
    // (l, u) ⊂ [fl, fl + 1]
    let lo_frac = l - &fl;
    let hi_frac = u - &fl;
    if lo_frac.is_zero() {
        // (fl, u): fl + 1/k with the least k > 1/(u − fl)
        let k = (hi_frac.recip()).floor() + BigRational::one();
        return fl + k.recip();
    }
    fl + simplest_between(&hi_frac.recip(), &lo_frac.recip()).recip()
}

/// Orbit points `γz₀` with `Re(γz₀) ∈ (lo, hi)`, generated by picking the
/// simplest rational `a/c` in ever smaller subintervals and then sliding
/// `d` within its class mod `c`: as `|d| → ∞`, `γz₀ → a/c`.
struct Candidates {
    heap: BinaryHeap<Reverse<(BigInt, usize)>>,
    intervals: Vec<(BigRational, BigRational, BigRational)>,
}

impl Candidates {
    fn new(lo: BigRational, hi: BigRational) -> Self {
        let mut c = Candidates { heap: BinaryHeap::new(), intervals: Vec::new() };
        c.push(lo, hi);
        c
    }

    fn push(&mut self, lo: BigRational, hi: BigRational) {
        if lo >= hi {
            return;
        }
        let q = simplest_between(&lo, &hi);
        self.heap.push(Reverse((q.denom().clone(), self.intervals.len())));
        self.intervals.push((lo, hi, q));
    }

    fn pop(&mut self) -> Option<BigRational> {
        let Reverse((_, i)) = self.heap.pop()?;
        let (lo, hi, q) = self.intervals[i].clone();
        self.push(lo, q.clone());
        self.push(q.clone(), hi);
        Some(q)
    }
}

/// Search constraints for the next stage.
struct StageTarget<'a> {
    /// Open interval that must contain `[Re − w, Re + w]`.
    lo: &'a BigRational,
    hi: &'a BigRational,
    /// `N` must exceed this (height strictly below the previous stage).
    n_min: &'a BigInt,
    /// Upper bound on the height, from `s_k ≥ s_start`.
    y_max: f64,
    /// `w = width_factor·Im(γz₀)`.
    width_factor: f64,
}

impl StageTarget<'_> {
    fn half_width(&self, p: &OrbitPoint) -> Option<BigRational> {
        BigRational::from_float(self.width_factor * p.im())
    }

    fn fits(&self, p: &OrbitPoint) -> bool {
        if &p.n <= self.n_min || p.im() > self.y_max {
            return false;
        }
        match self.half_width(p) {
            Some(w) => &(&p.re - &w) > self.lo && &(&p.re + &w) < self.hi,
            None => false,
        }
    }
}

/// The member of the class `d ≡ d₀ (mod c)` with the smallest `N` that
/// satisfies the stage constraints; `None` if sliding does not help.
fn best_in_class(a: &BigInt, c: &BigInt, target: &StageTarget) -> Option<OrbitPoint> {
    // a·d ≡ 1 (mod c)
    let ext = a.extended_gcd(c);
    if !ext.gcd.is_one() {
        return None;
    }
    let d0 = ext.x.mod_floor(c);
    let at = |j: &BigInt| -> OrbitPoint {
        let d = &d0 + j * c;
        let b = (a * &d - BigInt::one()) / c;
        OrbitPoint::new(a.clone(), b, c.clone(), d)
    };
    // j closest to the minimum of N, at d ≈ c/2
    let center = (c - BigInt::from(2) * &d0).div_floor(&(BigInt::from(2) * c));
    let mut best: Option<OrbitPoint> = None;
    for dir in [1_i64, -1] {
        let dir = BigInt::from(dir);
        let step = |k: &BigInt| &center + &dir * k;
        let mut k = BigInt::zero();
        if target.fits(&at(&step(&k))) {
            let p = at(&step(&k));
            if best.as_ref().is_none_or(|b| p.n < b.n) {
                best = Some(p);
            }
            continue;
        }
        // exponential search, then bisection on the first fitting shift
        let mut prev = BigInt::zero();
        k = BigInt::one();
        let mut found = false;
        for _ in 0..MAX_SHIFT_DOUBLINGS {
            if target.fits(&at(&step(&k))) {
                found = true;
                break;
            }
            prev = k.clone();
            k <<= 1;
        }
        if !found {
            continue;
        }
        let (mut lo, mut hi) = (prev, k);
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            if target.fits(&at(&step(&mid))) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let p = at(&step(&hi));
        if best.as_ref().is_none_or(|b| p.n < b.n) {
            best = Some(p);
        }
    }
    best
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Overflow("matrix entry exceeds i128".into()))
}

/// Build `α` whose trajectory visits the target `K(r(s_k))` at `depth`
/// increasing times `s_k`.
///
/// Stage `k` picks `γ_k` with `Im(γ_k z₀)` below the previous stage and
/// `Re(γ_k z₀)` inside the previous interval, sets `e^{−2s_k} = Im(γ_k z₀)`
/// and keeps the `α` with `|α + Re(γ_k z₀)| ≤ w_k`, where
/// `w_k = ½·c₀·ε_k·Im(γ_k z₀)`, `ε_k = min(1 − r(s_k), 0.05)` and
/// `c₀ = 1.8`. The trajectory point `−α + i·Im(γ_k z₀)` then lies within
/// hyperbolic distance `c₀ε_k/2` of `γ_k z₀`. Every stage is re-checked on
/// the final `α` by following the trajectory.
pub fn construct_counterexample(psi: &PsiSpec, depth: usize) -> Result<CounterexampleCertificate> {
    if psi.m != 1 || psi.n != 1 {
        return Err(Error::Unsupported("the construction is planar (m = n = 1)".into()));
    }
    let rate = RateFunction::new(psi.clone())?;
    let probe = rate.s_start.max(0.0) + 50.0;
    if !(rate.one_minus_r(probe)? > 0.0) {
        return Err(Error::Hypothesis(format!(
            "r(s) = {} at s = {probe}: ψ is not eventually below 1/t, so every α is ψ-Dirichlet",
            rate.r(probe)?
        )));
    }

    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    let mut n_min = BigInt::zero();
    let y_max = (-2.0 * rate.s_start).exp();
    let mut chosen: Vec<(OrbitPoint, f64, f64, BigRational, BigRational)> = Vec::new();

    for k in 0..depth {
        // −α ∈ (−hi, −lo)
        let (re_lo, re_hi) = (-hi.clone(), -lo.clone());
        let quarter = (&re_hi - &re_lo) / BigRational::from_integer(BigInt::from(4));
        let mut candidates = Candidates::new(&re_lo + &quarter, &re_hi - &quarter);
        let mut found = None;
        for _ in 0..MAX_CANDIDATES {
            let Some(q) = candidates.pop() else { break };
            let (a, c) = (q.numer().clone(), q.denom().clone());
            // ε depends on s_k, which depends on γ; iterate to a fixed point
            let mut eps = EPSILON_CAP;
            let mut point = None;
            for _ in 0..8 {
                let target = StageTarget {
                    lo: &re_lo,
                    hi: &re_hi,
                    n_min: &n_min,
                    y_max,
                    width_factor: 0.5 * INNER_BALL_CONSTANT * eps,
                };
                let Some(p) = best_in_class(&a, &c, &target) else { break };
                let s_k = -0.5 * p.im().ln();
                let r = rate.r(s_k)?;
                let eps_k = rate.one_minus_r(s_k)?.min(EPSILON_CAP);
                if eps_k <= 0.0 {
                    return Err(Error::Hypothesis(format!("r(s) = {r} ≥ 1 at s = {s_k}")));
                }
                if eps_k >= eps {
                    point = Some((p, s_k, r, eps));
                    break;
                }
                eps = eps_k;
            }
            if let Some(pt) = point {
                found = Some(pt);
                break;
            }
        }
        let Some((p, s_k, r, eps)) = found else {
            return Err(Error::Numeric(format!("no admissible orbit point found at stage {}", k + 1)));
        };
        let w = BigRational::from_float(0.5 * INNER_BALL_CONSTANT * eps * p.im())
            .ok_or_else(|| Error::Numeric("interval width underflow".into()))?;
        let center = -p.re.clone();
        lo = &center - &w;
        hi = &center + &w;
        n_min = p.n.clone();
        chosen.push((p, s_k, r, lo.clone(), hi.clone()));
    }

    let alpha_q = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
    let alpha = Alpha::from_rational(&alpha_q);
    let norm = NormDescriptor::euclidean2();
    let mut tracker = Tracker::new(&alpha);
    let mut stages = Vec::with_capacity(depth);
    for (k, (p, s_k, r, l, h)) in chosen.into_iter().enumerate() {
        let achieved = tracker.delta_at(s_k, &norm, EUCLIDEAN_DELTA)?;
        if achieved < r {
            return Err(Error::Numeric(format!(
                "stage {} fails re-verification: δ = {achieved} < r = {r}",
                k + 1
            )));
        }
        let g = &p.gamma;
        stages.push(Stage {
            gamma: [[to_i128(&g[0][0])?, to_i128(&g[0][1])?], [to_i128(&g[1][0])?, to_i128(&g[1][1])?]],
            s_k,
            interval: [rational_to_f64(&l), rational_to_f64(&h)],
            interval_exact: [l.to_string(), h.to_string()],
            achieved_delta: achieved,
            r_required: r,
        });
    }
    Ok(CounterexampleCertificate {
        psi: psi.id(),
        alpha: alpha.to_f64(),
        alpha_exact: alpha,
        depth,
        seed_interval: [0.0, 1.0],
        stages,
    })
}

fn rational_to_f64(q: &BigRational) -> f64 {
    ratio_to_f64(q.numer(), q.denom())
}

/// Recompute `δ` at every stage time with a fresh trajectory of the exact
/// `α`, walking a grid of step `step` up to the last stage.
pub fn reverify_certificate(cert: &CounterexampleCertificate, step: f64) -> Result<Vec<f64>> {
    let norm = NormDescriptor::euclidean2();
    let mut tracker = Tracker::new(&cert.alpha_exact);
    let mut s = 0.0;
    let mut out = Vec::with_capacity(cert.stages.len());
    for stage in &cert.stages {
        while s + step < stage.s_k {
            s += step;
            tracker.reduce_at(s)?;
        }
        out.push(tracker.delta_at(stage.s_k, &norm, EUCLIDEAN_DELTA)?);
    }
    Ok(out)
}

/// Whether the stage intervals are strictly nested, checked exactly.
pub fn intervals_nested(cert: &CounterexampleCertificate) -> Result<bool> {
    let parse = |s: &str| -> Result<BigRational> {
        s.parse().map_err(|_| Error::Numeric(format!("bad fraction {s:?}")))
    };
    let mut prev = (BigRational::zero(), BigRational::one());
    for stage in &cert.stages {
        let (l, h) = (parse(&stage.interval_exact[0])?, parse(&stage.interval_exact[1])?);
        if !(l > prev.0 && h < prev.1 && l < h) {
            return Ok(false);
        }
        prev = (l, h);
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub psi_id: String,
    pub k: u64,
    pub euclidean_sum: f64,
    pub supnorm_sum: f64,
}

/// Partial sums of both convergence series for every `(ψ, K)`.
pub fn condition_table(psis: &[PsiSpec], ks: &[u64]) -> Result<Vec<ConditionRow>> {
    let pairs: Vec<(&PsiSpec, u64)> = psis.iter().flat_map(|p| ks.iter().map(move |&k| (p, k))).collect();
    pairs
        .into_par_iter()
        .map(|(psi, k)| {
            let sums = series_partial_sums(psi, k)?;
            Ok(ConditionRow { psi_id: psi.id(), k, euclidean_sum: sums.euclidean, supnorm_sum: sums.supnorm })
        })
        .collect()
}

pub const CONDITION_CSV_HEADER: &str = "psi_id,K,euclidean_sum,supnorm_sum";

pub fn condition_csv(rows: &[ConditionRow]) -> String {
    let mut out = String::from(CONDITION_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.psi_id, r.k, sig12(r.euclidean_sum), sig12(r.supnorm_sum)));
    }
    out
}
