//! Critical determinants of planar norms through inscribed hexagons.
//!
//! A lattice generated by boundary points `p`, `q` of the unit ball with
//! `q − p` also on the boundary is admissible, and every critical lattice
//! arises this way. So `Δ_ν` is the minimum of `det[p q]` over the
//! one-parameter family of such hexagons, indexed by the angle `t₀` of `p`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};
use crate::norms::NormDescriptor;
use crate::numfmt::sig12;

pub const GRID_POINTS: usize = 720;
pub const REFINE_TOL: f64 = 1e-10;
pub const TIE_TOL: f64 = 1e-8;

const ROOT_SCAN_POINTS: usize = 64;
const ROOT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexagonConfig {
    pub p: [f64; 2],
    pub q: [f64; 2],
    /// Stored as `q − p`.
    pub r: [f64; 2],
    pub det_pq: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    HexagonScan,
    ParallelogramRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub delta: f64,
    pub t0: f64,
    pub minimizing_config: HexagonConfig,
    pub method: Method,
    /// Grid angles whose determinant is within [`TIE_TOL`] of the minimum.
    pub ties: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Hexagon configuration starting at `p = boundary_point(t₀)`, with the
/// number of sign changes of `ν(q(s) − p) − 1` seen on the scan grid.
pub fn hexagon_with_crossings(norm: &NormDescriptor, t0: f64) -> Result<(HexagonConfig, usize)> {
    if norm.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: norm.dim() });
    }
    let p = norm.boundary_point(t0)?;
    let f = |s: f64| -> Result<f64> {
        let q = norm.boundary_point(s)?;
        Ok(norm.eval2([q[0] - p[0], q[1] - p[1]]) - 1.0)
    };
    let h = PI / ROOT_SCAN_POINTS as f64;
    let mut values = Vec::with_capacity(ROOT_SCAN_POINTS);
    let mut bracket = None;
    let mut crossings = 0;
    let mut prev = (t0, -1.0);
    for i in 1..=ROOT_SCAN_POINTS {
        let s = t0 + i as f64 * h;
        let v = f(s)?;
        values.push(v);
        if prev.1 <= 0.0 && v > 0.0 || prev.1 > 0.0 && v <= 0.0 {
            crossings += 1;
            if bracket.is_none() {
                bracket = Some((prev.0, s));
            }
        }
        prev = (s, v);
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::RootNotBracketed(format!("ν(q(s) − p) − 1 at t0 = {t0}: {values:?}"))
    })?;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let q = norm.boundary_point(hi)?;
    let r = [q[0] - p[0], q[1] - p[1]];
    let det_pq = p[0] * q[1] - p[1] * q[0];
    Ok((HexagonConfig { p, q, r, det_pq }, crossings))
}

/// The inscribed hexagon whose first vertex sits at angle `t₀`.
pub fn hexagon_at(norm: &NormDescriptor, t0: f64) -> Result<HexagonConfig> {
    hexagon_with_crossings(norm, t0).map(|(c, _)| c)
}

/// `Δ_ν` by a 720-point scan of `t₀ ∈ [0, π)` refined by golden-section
/// search around the three best grid points. Parallelograms short-circuit
/// to area/4.
pub fn critical_determinant(norm: &NormDescriptor) -> Result<CriticalData> {
    let h = PI / GRID_POINTS as f64;
    let scan: Vec<(f64, HexagonConfig, usize)> = (0..GRID_POINTS)
        .into_par_iter()
        .map(|i| {
            let t0 = i as f64 * h;
            hexagon_with_crossings(norm, t0).map(|(c, n)| (t0, c, n))
        })
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let multi: Vec<f64> = scan.iter().filter(|e| e.2 > 1).map(|e| e.0).collect();
    if !multi.is_empty() {
        warnings.push(format!(
            "{} start angles bracket several roots of ν(q − p) = 1 (first at t0 = {}); the first root was used",
            multi.len(),
            multi[0]
        ));
    }

    let mut order: Vec<usize> = (0..scan.len()).collect();
    order.sort_by(|&a, &b| scan[a].1.det_pq.total_cmp(&scan[b].1.det_pq));
    let grid_min = scan[order[0]].1.det_pq;

    let mut best = (scan[order[0]].0, scan[order[0]].1);
    for &i in order.iter().take(3) {
        let (t, c) = golden_section(norm, scan[i].0 - h, scan[i].0 + h)?;
        if c.det_pq < best.1.det_pq {
            best = (t, c);
        }
    }
    let ties = scan
        .iter()
        .filter(|e| e.1.det_pq <= grid_min + TIE_TOL)
        .map(|e| e.0)
        .collect();

    let (delta, method) = match norm.exact_area() {
        Some(area) if norm.is_parallelogram() => (area / 4.0, Method::ParallelogramRule),
        _ => (best.1.det_pq, Method::HexagonScan),
    };
    Ok(CriticalData {
        delta,
        t0: best.0.rem_euclid(PI),
        minimizing_config: best.1,
        method,
        ties,
        warnings,
    })
}

fn golden_section(norm: &NormDescriptor, mut a: f64, mut b: f64) -> Result<(f64, HexagonConfig)> {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = hexagon_at(norm, x1)?;
    let mut f2 = hexagon_at(norm, x2)?;
    while b - a > REFINE_TOL {
        if f1.det_pq <= f2.det_pq {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = hexagon_at(norm, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = hexagon_at(norm, x2)?;
        }
    }
    Ok(if f1.det_pq <= f2.det_pq { (x1, f1) } else { (x2, f2) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusEntry {
    pub t0: f64,
    pub config: HexagonConfig,
    /// `(1/√Δ)·[p q]`, unimodular when the configuration is critical.
    pub basis: Mat2,
    pub is_critical: bool,
}

/// Hexagon configurations at `n` equispaced angles in `[0, π)`, flagged
/// critical when `det[p q] ≤ Δ·(1 + 10⁻⁶)`.
pub fn trace_critical_locus(norm: &NormDescriptor, critical: &CriticalData, n: usize) -> Result<Vec<LocusEntry>> {
    let scale = 1.0 / critical.delta.sqrt();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t0 = i as f64 * PI / n as f64;
            let config = hexagon_at(norm, t0)?;
            let basis = mat2::from_columns(
                [scale * config.p[0], scale * config.p[1]],
                [scale * config.q[0], scale * config.q[1]],
            );
            Ok(LocusEntry {
                t0,
                config,
                basis,
                is_critical: config.det_pq <= critical.delta * (1.0 + 1e-6),
            })
        })
        .collect()
}

pub const LOCUS_CSV_HEADER: &str = "t0,px,py,qx,qy,det,is_critical";

pub fn locus_csv(entries: &[LocusEntry]) -> String {
    let mut out = String::from(LOCUS_CSV_HEADER);
    out.push('\n');
    for e in entries {
        let c = &e.config;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig12(e.t0),
            sig12(c.p[0]),
            sig12(c.p[1]),
            sig12(c.q[0]),
            sig12(c.q[1]),
            sig12(c.det_pq),
            e.is_critical
        ));
    }
    out
}
