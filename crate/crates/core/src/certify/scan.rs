//! Deterministic sampled sup/inf over boxes in `(t, u, v)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Mode;

/// Sub-intervals per axis in the refinement pass.
const REFINE_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub t: [f64; 2],
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl BoxSpec {
    pub fn new(t: [f64; 2], u: [f64; 2], v: [f64; 2]) -> BoxSpec {
        BoxSpec { t, u, v }
    }

    pub fn contains(&self, other: &BoxSpec) -> bool {
        let inside = |a: [f64; 2], b: [f64; 2]| a[0] <= b[0] && b[1] <= a[1];
        inside(self.t, other.t) && inside(self.u, other.u) && inside(self.v, other.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxExtremum {
    pub value: f64,
    /// `(t, u, v)` where the value is attained.
    pub point: [f64; 3],
}

/// `n + 1` equispaced points on `[lo, hi]`, plus `0` when it lies strictly
/// inside and is not already a grid point.
pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    let n = n.max(1);
    let mut pts: Vec<f64> = (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect();
    if lo < 0.0 && hi > 0.0 && !pts.contains(&0.0) {
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
    }
    pts
}

/// `n + 1` geometrically spaced points from `lo > 0` to `hi`.
pub fn geometric_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    let n = n.max(1);
    let ratio = hi / lo;
    (0..=n).map(|k| if k == n { hi } else { lo * ratio.powf(k as f64 / n as f64) }).collect()
}

/// Geometric points clustering at both `lo` and `hi`: the union of a
/// geometric axis from `lo` and its mirror towards `hi`.
pub fn two_sided_geometric_axis(lo: f64, hi: f64, n: usize, floor: f64) -> Vec<f64> {
    let half = (n / 2).max(1);
    let mid = 0.5 * (lo + hi);
    let mut pts = geometric_axis(lo.max(floor), mid, half);
    let width = hi - mid;
    if width > 0.0 {
        pts.extend(geometric_axis(width * floor / hi.max(floor), width, half).into_iter().map(|d| hi - d));
        pts.push(hi);
    }
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Extremum of `obj` over the tensor grid `axes`, followed by one refinement
/// pass on the neighbourhood of the best point. NaN values mark excluded
/// points and are skipped. Ties keep the lexicographically first point.
pub fn scan_axes<F>(obj: &F, axes: &[Vec<f64>; 3], mode: Mode) -> Result<BoxExtremum>
where
    F: Fn(f64, f64, f64) -> Result<f64> + Sync,
{
    let (best, idx) = grid_best(obj, axes, mode)?;
    let Some(mut best) = best else {
        return Err(Error::Internal("box scan found no admissible sample".into()));
    };
    let sub = |axis: &Vec<f64>, i: usize| -> Vec<f64> {
        if axis.len() == 1 {
            return axis.clone();
        }
        let lo = axis[i.saturating_sub(1)];
        let hi = axis[(i + 1).min(axis.len() - 1)];
        uniform_axis(lo, hi, REFINE_STEPS)
    };
    let local = [sub(&axes[0], idx[0]), sub(&axes[1], idx[1]), sub(&axes[2], idx[2])];
    if let (Some(r), _) = grid_best(obj, &local, mode)? {
        if mode.better(r.value, best.value) {
            best = r;
        }
    }
    Ok(best)
}

type GridBest = (Option<BoxExtremum>, [usize; 3]);

fn grid_best<F>(obj: &F, axes: &[Vec<f64>; 3], mode: Mode) -> Result<GridBest>
where
    F: Fn(f64, f64, f64) -> Result<f64> + Sync,
{
    let slabs: Vec<Result<GridBest>> = axes[0]
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut best: Option<BoxExtremum> = None;
            let mut idx = [i, 0, 0];
            for (j, &u) in axes[1].iter().enumerate() {
                for (k, &v) in axes[2].iter().enumerate() {
                    let value = obj(t, u, v)?;
                    if value.is_nan() {
                        continue;
                    }
                    if best.is_none_or(|b| mode.better(value, b.value)) {
                        best = Some(BoxExtremum { value, point: [t, u, v] });
                        idx = [i, j, k];
                    }
                }
            }
            Ok((best, idx))
        })
        .collect();
    let mut out: GridBest = (None, [0, 0, 0]);
    for slab in slabs {
        let (b, idx) = slab?;
        if let Some(b) = b {
            if out.0.is_none_or(|o| mode.better(b.value, o.value)) {
                out = (Some(b), idx);
            }
        }
    }
    Ok(out)
}

/// Extremum of `obj` over `bx` on a uniform grid with `density` intervals
/// per axis.
pub fn box_extremum<F>(obj: &F, bx: &BoxSpec, mode: Mode, density: usize) -> Result<BoxExtremum>
where
    F: Fn(f64, f64, f64) -> Result<f64> + Sync,
{
    if density < 8 {
        return Err(Error::invalid(format!("box density must be at least 8, got {density}")));
    }
    for (name, r) in [("t", bx.t), ("u", bx.u), ("v", bx.v)] {
        if !(r[0] <= r[1]) || !r[0].is_finite() || !r[1].is_finite() {
            return Err(Error::invalid(format!("box range for {name} must be finite with lo <= hi, got {r:?}")));
        }
    }
    let axes = [
        uniform_axis(bx.t[0], bx.t[1], density),
        uniform_axis(bx.u[0], bx.u[1], density),
        uniform_axis(bx.v[0], bx.v[1], density),
    ];
    scan_axes(obj, &axes, mode)
}
