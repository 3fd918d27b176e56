//! Diagonal-flow trajectories `a_s Λ_α`, finite-horizon Dirichlet checks
//! and the direct integer search they are compared against.
//!
//! A hit is a flow time with `δ_ν(a_s Λ_α) ≥ r(s)`, i.e. a time at which
//! the trajectory lies in the shrinking target. Under the Dani
//! correspondence hits are exactly the failures of the Dirichlet-type
//! inequality, so `α` is `ψ`-Dirichlet iff hits stop eventually.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, Tracker};
use crate::dani::{a_s, PsiSpec, RateFunction};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::mat2::{self, Mat2};
use crate::norms::NormDescriptor;

pub const DEFAULT_GRID_STEP: f64 = 0.01;
const MIN_ADAPTIVE_STEP: f64 = 1.0 / 1024.0;
const EDGE_BISECTIONS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub s: f64,
    /// Reduced basis of `a_s Λ_α`, generators as columns.
    pub basis: Mat2,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub s_lo: f64,
    pub s_hi: f64,
    pub delta_max: f64,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::OutOfDomain("flow-time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `δ_ν(a_s u_α ℤ²)` along `s_grid`.
pub fn trajectory_delta(alpha: &Alpha, norm: &NormDescriptor, critical_det: f64, s_grid: &[f64]) -> Result<Vec<FlowPoint>> {
    check_grid(s_grid)?;
    let mut tracker = Tracker::new(alpha);
    s_grid
        .iter()
        .map(|&s| {
            let delta = tracker.delta_at(s, norm, critical_det)?;
            let [b1, b2] = tracker.reduced();
            Ok(FlowPoint { s, basis: mat2::from_columns(b1, b2), delta })
        })
        .collect()
}

/// `u_A = [[I_m, A], [0, I_n]]` for an `m × n` matrix `A`.
pub fn u_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut u = DMatrix::identity(m + n, m + n);
    u.view_mut((0, m), (m, n)).copy_from(a);
    u
}

/// `δ_ν(a_s u_A ℤ^d)` for a general `m × n` matrix, in double precision.
///
/// Reliable while `e^{s(1/m + 1/n)}` stays well below `2^{52}`; the planar
/// case with long horizons should go through [`trajectory_delta`].
pub fn trajectory_delta_matrix(
    a: &DMatrix<f64>,
    norm: &NormDescriptor,
    critical_det: f64,
    s_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_grid(s_grid)?;
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::OutOfDomain("A must be a nonempty matrix".into()));
    }
    let u = u_matrix(a);
    s_grid
        .iter()
        .map(|&s| {
            let lattice = Lattice::new(a_s(s, m as u32, n as u32) * &u)?;
            Ok((s, lattice.delta(norm, critical_det)?))
        })
        .collect()
}

/// Grid step that cannot skip a hit deeper than `depth` in `ln δ`:
/// `depth·κ₁/κ₂·min(m, n)/d`.
pub fn safe_grid_step(norm: &NormDescriptor, depth: f64, m: u32, n: u32) -> f64 {
    let (k1, k2) = norm.equivalence_constants();
    depth * k1 / k2 * m.min(n) as f64 / (m + n) as f64
}

/// Hits of the trajectory in `[s0, s_max]` on a grid of step `step`, with
/// interval ends refined by bisection.
pub fn dirichlet_hits(
    alpha: &Alpha,
    rate: &RateFunction,
    norm: &NormDescriptor,
    critical_det: f64,
    s0: f64,
    s_max: f64,
    step: f64,
) -> Result<Vec<HitRecord>> {
    let grid = flow_grid(s0, s_max, step)?;
    let r = rate.r_grid(&grid)?;
    hits_on_grid(alpha, rate, norm, critical_det, &grid, &r)
}

/// `s0, s0 + h, …` up to and including `s_max`.
pub fn flow_grid(s0: f64, s_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(s_max >= s0) || !s0.is_finite() || !s_max.is_finite() {
        return Err(Error::OutOfDomain(format!("bad flow range [{s0}, {s_max}] with step {step}")));
    }
    let count = ((s_max - s0) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| s0 + i as f64 * step).collect();
    if s_max - grid[count] > 1e-12 {
        grid.push(s_max);
    }
    Ok(grid)
}

/// Hit detection with precomputed radii `r[i] = r(grid[i])`. The rate
/// function is only consulted when refining interval ends.
pub fn hits_on_grid(
    alpha: &Alpha,
    rate: &RateFunction,
    norm: &NormDescriptor,
    critical_det: f64,
    grid: &[f64],
    r: &[f64],
) -> Result<Vec<HitRecord>> {
    check_grid(grid)?;
    if grid.len() != r.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: r.len() });
    }
    let mut tracker = Tracker::new(alpha);
    let mut hits = Vec::new();
    let mut open: Option<(usize, f64)> = None;
    for (i, &s) in grid.iter().enumerate() {
        let delta = tracker.delta_at(s, norm, critical_det)?;
        let inside = delta >= r[i];
        match (&mut open, inside) {
            (None, true) => open = Some((i, delta)),
            (Some((_, best)), true) => *best = best.max(delta),
            (Some((start, best)), false) => {
                hits.push(close_hit(&tracker, rate, norm, critical_det, grid, *start, i, *best)?);
                open = None;
            }
            (None, false) => {}
        }
    }
    if let Some((start, best)) = open {
        hits.push(close_hit(&tracker, rate, norm, critical_det, grid, start, grid.len(), best)?);
    }
    Ok(hits)
}

#[allow(clippy::too_many_arguments)]
fn close_hit(
    tracker: &Tracker,
    rate: &RateFunction,
    norm: &NormDescriptor,
    critical_det: f64,
    grid: &[f64],
    start: usize,
    end: usize,
    best: f64,
) -> Result<HitRecord> {
    let mut t = tracker.clone();
    let mut inside = |s: f64| -> Result<bool> { Ok(t.delta_at(s, norm, critical_det)? >= rate.r(s)?) };
    let s_lo = if start == 0 {
        grid[0]
    } else {
        bisect_edge(&mut inside, grid[start - 1], grid[start], false)?
    };
    let s_hi = if end == grid.len() {
        grid[end - 1]
    } else {
        bisect_edge(&mut inside, grid[end - 1], grid[end], true)?
    };
    Ok(HitRecord { s_lo, s_hi, delta_max: best })
}

/// Locate the switch of `inside` between `a` and `b`; `inside(a)` is
/// `from_inside`. Returns the end of the interval that is inside.
fn bisect_edge(inside: &mut impl FnMut(f64) -> Result<bool>, mut a: f64, mut b: f64, from_inside: bool) -> Result<f64> {
    for _ in 0..EDGE_BISECTIONS {
        let mid = 0.5 * (a + b);
        if inside(mid)? == from_inside {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(if from_inside { a } else { b })
}

/// Halve the grid step from [`DEFAULT_GRID_STEP`] until two successive
/// hit lists agree. Returns the hits and the step that produced them.
pub fn dirichlet_hits_adaptive(
    alpha: &Alpha,
    rate: &RateFunction,
    norm: &NormDescriptor,
    critical_det: f64,
    s0: f64,
    s_max: f64,
) -> Result<(Vec<HitRecord>, f64)> {
    let mut step = DEFAULT_GRID_STEP;
    let mut prev = dirichlet_hits(alpha, rate, norm, critical_det, s0, s_max, step)?;
    while step > MIN_ADAPTIVE_STEP {
        step /= 2.0;
        let next = dirichlet_hits(alpha, rate, norm, critical_det, s0, s_max, step)?;
        let same = next.len() == prev.len()
            && next
                .iter()
                .zip(&prev)
                .all(|(a, b)| (a.s_lo - b.s_lo).abs() < 1e-6 && (a.s_hi - b.s_hi).abs() < 1e-6);
        prev = next;
        if same {
            return Ok((prev, step));
        }
    }
    Ok((prev, step))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletReport {
    pub alpha: Alpha,
    pub psi: String,
    pub s_star: f64,
    pub s_max: f64,
    pub grid_step: f64,
    pub hits: Vec<HitRecord>,
    pub last_hit: Option<f64>,
    /// No hit in `[s_star, s_max]`.
    #[serde(rename = "dirichlet_up_to_S")]
    pub dirichlet_up_to_s: bool,
}

/// Finite-horizon surrogate of `α ∈ D_ν(ψ)`: scan `[s_start, s_max]` and
/// report whether the hits stop before `s_star`.
pub fn dirichlet_check(
    alpha: &Alpha,
    rate: &RateFunction,
    norm: &NormDescriptor,
    critical_det: f64,
    s_star: f64,
    s_max: f64,
    step: Option<f64>,
) -> Result<DirichletReport> {
    let s0 = rate.s_start.max(0.0);
    let (hits, grid_step) = match step {
        Some(h) => (dirichlet_hits(alpha, rate, norm, critical_det, s0, s_max, h)?, h),
        None => dirichlet_hits_adaptive(alpha, rate, norm, critical_det, s0, s_max)?,
    };
    let last_hit = hits.last().map(|h| h.s_hi);
    let dirichlet_up_to_s = hits.iter().all(|h| h.s_hi < s_star);
    Ok(DirichletReport {
        alpha: alpha.clone(),
        psi: rate.psi.id(),
        s_star,
        s_max,
        grid_step,
        hits,
        last_hit,
        dirichlet_up_to_s,
    })
}

/// Whether some `q ≥ 1` and integer `p` give
/// `ν((qα − p)/ψ(t), q/t) < Δ_ν^{−1/2}`.
///
/// Any solution has `q/t < 1/(κ₁√Δ)`, so scanning `q` up to
/// `⌈2κ₂t/(κ₁√Δ)⌉` is exhaustive. For each `q` only the two integers `p`
/// around `qα − x*ψ(t)` need testing, where `x*` minimizes the convex
/// function `x ↦ ν(x, q/t)`.
pub fn direct_check(alpha: &Alpha, t: f64, psi: &PsiSpec, norm: &NormDescriptor, critical_det: f64) -> Result<bool> {
    Ok(direct_search(alpha, t, psi, norm, critical_det)?.is_some())
}

/// The first solution `(p, q)` found by [`direct_check`].
pub fn direct_search(
    alpha: &Alpha,
    t: f64,
    psi: &PsiSpec,
    norm: &NormDescriptor,
    critical_det: f64,
) -> Result<Option<(BigInt, i64)>> {
    if norm.dim() != 2 || psi.m != 1 || psi.n != 1 {
        return Err(Error::Unsupported("the direct search is planar (m = n = 1)".into()));
    }
    let psi_t = psi.eval(t)?;
    let bound = 1.0 / critical_det.sqrt();
    let (k1, k2) = norm.equivalence_constants();
    let q_max = (2.0 * k2 * t / (k1 * critical_det.sqrt())).ceil() as i64;
    let symmetric = norm.is_sup() || norm.is_euclidean() || matches!(norm.spec(), crate::norms::NormSpec::Lp { .. });
    for q in 1..=q_max {
        let y = q as f64 / t;
        let x_star = if symmetric { 0.0 } else { horizontal_minimizer(norm, y, k1, k2) };
        let (p0, frac) = alpha.floor_and_frac(q);
        // αq − (p0 + j) = frac − j; the target residual is x*·ψ
        let j0 = (frac - x_star * psi_t).floor() as i64;
        for j in [j0, j0 + 1] {
            let p = &p0 + j;
            let res = alpha.residual(&p, &BigInt::from(q));
            if norm.eval2([res / psi_t, y]) < bound {
                return Ok(Some((p, q)));
            }
        }
    }
    Ok(None)
}

/// Minimizer of `x ↦ ν(x, y)`; it lies in `|x| ≤ κ₂|y|/κ₁`.
fn horizontal_minimizer(norm: &NormDescriptor, y: f64, k1: f64, k2: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let r = k2 * y.abs() / k1;
    let (mut a, mut b) = (-r, r);
    let f = |x: f64| norm.eval2([x, y]);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 * r.max(1e-300) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// `δ_ν(b_t Λ_α)` and the radius `t^{1/2}ψ(t)^{1/2}` it is compared with.
pub fn dynamic_membership(
    alpha: &Alpha,
    t: f64,
    psi: &PsiSpec,
    norm: &NormDescriptor,
    critical_det: f64,
) -> Result<(f64, f64)> {
    if psi.m != 1 || psi.n != 1 {
        return Err(Error::Unsupported("the planar flow needs m = n = 1".into()));
    }
    let s = psi.s_of_t(t)?;
    let delta = Tracker::new(alpha).delta_at(s, norm, critical_det)?;
    Ok((delta, psi.ln_r_of_t(t)?.exp()))
}
