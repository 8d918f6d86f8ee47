//! Nyström collocation for the Hammerstein system, damped Picard and Newton
//! iterations, multistart and localization of the solutions found.
//!
//! The grid contains every kernel breakpoint and the ends of both cone
//! intervals. Each grid cell carries an order-8 Gauss rule, so for a grid
//! node `t` every kink of `s -> k(t,s)` falls on a panel edge. Values of
//! `u`, `v` at the quadrature points come from piecewise cubic interpolation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{Level, ProblemSpec, RadiiLadder, SetKind, SetRef, Shell};
use crate::error::{Error, Result};
use crate::interp;
use crate::quadrature::{piece_edges, PanelRule};
use crate::settings::SolverSettings;

/// Slack allowed in the cone inequalities of reported solutions.
pub const CONE_SLACK: f64 = 1e-6;
/// Picard and Newton give up once an iterate exceeds this sup norm.
const BLOWUP: f64 = 1e12;
/// Newton fails after this many steps without residual decrease.
const STALL_LIMIT: usize = 5;
const MAX_HALVINGS: usize = 12;

pub struct SolverGrid {
    nodes: Vec<f64>,
    quad: Vec<f64>,
    stencils: Vec<(usize, [f64; 4])>,
    /// For each node, the quadrature points whose stencil uses it.
    dependents: Vec<Vec<(usize, f64)>>,
    /// `k_i(t_j, s_q) g_i(s_q) w_q`.
    weights: [DMatrix<f64>; 2],
    cone: [(f64, f64, f64); 2],
}

impl SolverGrid {
    /// About `cells` cells on `[0,1]`, distributed over the pieces between
    /// breakpoints by length.
    pub fn new(p: &ProblemSpec, cells: usize) -> Result<SolverGrid> {
        if cells < 4 {
            return Err(Error::invalid(format!("solver grid needs at least 4 cells, got {cells}")));
        }
        let mut breaks = Vec::new();
        for k in &p.kernels {
            breaks.extend([k.variant.fixed_break(), k.a, k.b]);
        }
        let edges = piece_edges(0.0, 1.0, &breaks);
        let mut nodes = vec![0.0];
        for w in edges.windows(2) {
            let len = w[1] - w[0];
            let m = ((cells as f64 * len).round() as usize).max(1);
            for k in 1..=m {
                nodes.push(if k == m { w[1] } else { w[0] + len * k as f64 / m as f64 });
            }
        }
        let panels: Vec<(f64, f64)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
        let rule = PanelRule::from_panels(panels, 0);
        let stencils: Vec<(usize, [f64; 4])> = rule
            .nodes
            .iter()
            .map(|&s| {
                let start = interp::stencil_start(&nodes, s);
                (start, interp::stencil_weights(&nodes, start, s))
            })
            .collect();
        let mut dependents = vec![Vec::new(); nodes.len()];
        for (q, (start, w)) in stencils.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                dependents[start + j].push((q, *wj));
            }
        }
        let weights = [0, 1].map(|i| {
            let k = &p.kernels[i];
            let g: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&s, &w)| p.g[i].eval(s) * w).collect();
            DMatrix::from_fn(nodes.len(), rule.nodes.len(), |j, q| k.eval(nodes[j], rule.nodes[q]) * g[q])
        });
        let cone = [0, 1].map(|i| (p.kernels[i].c, p.kernels[i].a, p.kernels[i].b));
        Ok(SolverGrid { nodes, quad: rule.nodes, stencils, dependents, weights, cone })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn interp_at(&self, values: &[f64], q: usize) -> f64 {
        let (start, w) = &self.stencils[q];
        w.iter().enumerate().map(|(j, wj)| wj * values[start + j]).sum()
    }

    fn f_values(&self, p: &ProblemSpec, u: &[f64], v: &[f64]) -> Result<[Vec<f64>; 2]> {
        let mut out = [Vec::with_capacity(self.quad.len()), Vec::with_capacity(self.quad.len())];
        for (q, &s) in self.quad.iter().enumerate() {
            let (uq, vq) = (self.interp_at(u, q), self.interp_at(v, q));
            out[0].push(p.f_value(0, s, uq, vq)?);
            out[1].push(p.f_value(1, s, uq, vq)?);
        }
        Ok(out)
    }

    /// `T(u,v)` at the grid nodes.
    pub fn apply(&self, p: &ProblemSpec, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        let [f1, f2] = self.f_values(p, u, v)?;
        let tu = &self.weights[0] * DVector::from_vec(f1);
        let tv = &self.weights[1] * DVector::from_vec(f2);
        Ok((tu.as_slice().to_vec(), tv.as_slice().to_vec()))
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.nodes.len() {
            return Err(Error::invalid(format!(
                "grid function has {n} values, the grid has {} nodes",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    /// Wraps node values, computing norms, residual and cone checks.
    pub fn pair(&self, p: &ProblemSpec, u: Vec<f64>, v: Vec<f64>) -> Result<GridFunctionPair> {
        let (tu, tv) = self.apply(p, &u, &v)?;
        let residual = sup_diff(&u, &tu).max(sup_diff(&v, &tv));
        let cone = [self.cone_check(0, &u), self.cone_check(1, &v)];
        Ok(GridFunctionPair { nodes: self.nodes.clone(), norms: [sup(&u), sup(&v)], u, v, residual, cone })
    }

    pub fn constant(&self, p: &ProblemSpec, u0: f64, v0: f64) -> Result<GridFunctionPair> {
        self.pair(p, vec![u0; self.len()], vec![v0; self.len()])
    }

    /// `x` interpolated onto this grid.
    pub fn resample(&self, p: &ProblemSpec, x: &GridFunctionPair) -> Result<GridFunctionPair> {
        let u = self.nodes.iter().map(|&t| interp::eval(&x.nodes, &x.u, t)).collect();
        let v = self.nodes.iter().map(|&t| interp::eval(&x.nodes, &x.v, t)).collect();
        self.pair(p, u, v)
    }

    pub fn apply_t(&self, p: &ProblemSpec, x: &GridFunctionPair) -> Result<GridFunctionPair> {
        let (tu, tv) = self.apply(p, &x.u, &x.v)?;
        self.pair(p, tu, tv)
    }

    fn cone_check(&self, i: usize, w: &[f64]) -> ConeCheck {
        let (c, a, b) = self.cone[i];
        let norm = sup(w);
        let min = self
            .nodes
            .iter()
            .zip(w)
            .filter(|(t, _)| **t >= a && **t <= b)
            .map(|(_, x)| *x)
            .fold(f64::INFINITY, f64::min);
        let required = c * norm;
        let slack = min - required;
        let has_pos = w.iter().any(|x| *x > 0.0);
        let has_neg = w.iter().any(|x| *x < 0.0);
        ConeCheck {
            min_on_interval: min,
            required,
            slack,
            holds: slack >= -CONE_SLACK * norm.max(1.0),
            sign_change: has_pos && has_neg,
        }
    }

    /// `I - T'(x)` by forward differences. Perturbing one node only changes
    /// `f` at the quadrature points of the neighbouring cells.
    pub fn jacobian(&self, p: &ProblemSpec, u: &[f64], v: &[f64], fd_step: f64) -> Result<DMatrix<f64>> {
        let n = self.len();
        let h = fd_step * (1.0 + sup(u).max(sup(v)));
        let uq: Vec<f64> = (0..self.quad.len()).map(|q| self.interp_at(u, q)).collect();
        let vq: Vec<f64> = (0..self.quad.len()).map(|q| self.interp_at(v, q)).collect();
        let base = self.f_values(p, u, v)?;
        let columns: Vec<Result<Vec<f64>>> = (0..2 * n)
            .into_par_iter()
            .map(|col| {
                let (which, j) = (col / n, col % n);
                let mut out = vec![0.0; 2 * n];
                out[col] = 1.0;
                for &(q, w) in &self.dependents[j] {
                    let s = self.quad[q];
                    let (mut a, mut b) = (uq[q], vq[q]);
                    if which == 0 {
                        a += w * h;
                    } else {
                        b += w * h;
                    }
                    for i in 0..2 {
                        let df = (p.f_value(i, s, a, b)? - base[i][q]) / h;
                        if df != 0.0 {
                            let wcol = self.weights[i].column(q);
                            for r in 0..n {
                                out[i * n + r] -= wcol[r] * df;
                            }
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for (c, col) in columns.into_iter().enumerate() {
            jac.set_column(c, &DVector::from_vec(col?));
        }
        Ok(jac)
    }
}

fn sup(w: &[f64]) -> f64 {
    w.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `min w >= c ||w||` on the cone interval, with slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub min_on_interval: f64,
    pub required: f64,
    pub slack: f64,
    pub holds: bool,
    pub sign_change: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionPair {
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub norms: [f64; 2],
    /// `||x - T(x)||` at the nodes.
    pub residual: f64,
    pub cone: [ConeCheck; 2],
}

impl GridFunctionPair {
    pub fn norm(&self) -> f64 {
        self.norms[0].max(self.norms[1])
    }

    pub fn distance(&self, other: &GridFunctionPair) -> f64 {
        sup_diff(&self.u, &other.u).max(sup_diff(&self.v, &other.v))
    }

    /// Solution table with header `t,u,v`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,u,v\n");
        for ((t, u), v) in self.nodes.iter().zip(&self.u).zip(&self.v) {
            s.push_str(&format!("{t:?},{u:?},{v:?}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationOutcome {
    pub solution: GridFunctionPair,
    pub iterations: usize,
    /// Last sup-norm step.
    pub step: f64,
}

/// `x <- (1 - damping) x + damping T(x)` until the step is at most
/// `tol * max(1, ||x||)`.
pub fn solve_picard(
    p: &ProblemSpec,
    grid: &SolverGrid,
    x0: &GridFunctionPair,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<IterationOutcome> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::invalid(format!("damping must lie in (0, 1], got {damping}")));
    }
    let (mut u, mut v) = (x0.u.clone(), x0.v.clone());
    let mut step = f64::INFINITY;
    for it in 1..=max_iter {
        let (tu, tv) = grid.apply(p, &u, &v)?;
        let nu: Vec<f64> = u.iter().zip(&tu).map(|(x, y)| (1.0 - damping) * x + damping * y).collect();
        let nv: Vec<f64> = v.iter().zip(&tv).map(|(x, y)| (1.0 - damping) * x + damping * y).collect();
        step = sup_diff(&u, &nu).max(sup_diff(&v, &nv));
        u = nu;
        v = nv;
        let norm = sup(&u).max(sup(&v));
        if !norm.is_finite() || norm > BLOWUP {
            return Err(Error::Diverged(format!("Picard iterate blew up (norm {norm:e}) after {it} steps")));
        }
        if step <= tol * norm.max(1.0) {
            return Ok(IterationOutcome { solution: grid.pair(p, u, v)?, iterations: it, step });
        }
    }
    let last = grid.pair(p, u, v)?;
    Err(Error::Diverged(format!(
        "Picard did not converge in {max_iter} steps (last step {step:e}, residual {:e})",
        last.residual
    )))
}

/// Newton's method on `x - T(x) = 0` with a finite-difference Jacobian and
/// step halving. Converged once the residual is at most `tol * max(1, ||x||)`.
pub fn solve_newton(
    p: &ProblemSpec,
    grid: &SolverGrid,
    x0: &GridFunctionPair,
    tol: f64,
    max_iter: usize,
    fd_step: f64,
) -> Result<IterationOutcome> {
    let n = grid.len();
    let mut x = grid.pair(p, x0.u.clone(), x0.v.clone())?;
    let mut stalls = 0;
    let mut step = 0.0;
    for it in 0..=max_iter {
        if x.residual <= tol * x.norm().max(1.0) {
            return Ok(IterationOutcome { solution: x, iterations: it, step });
        }
        if it == max_iter {
            break;
        }
        let (tu, tv) = grid.apply(p, &x.u, &x.v)?;
        let mut rhs = DVector::zeros(2 * n);
        for j in 0..n {
            rhs[j] = tu[j] - x.u[j];
            rhs[n + j] = tv[j] - x.v[j];
        }
        let jac = grid.jacobian(p, &x.u, &x.v, fd_step)?;
        let delta = match jac.clone().lu().solve(&rhs) {
            Some(d) if d.iter().all(|z| z.is_finite()) => d,
            _ => return Err(Error::SingularJacobian(condition_estimate(jac))),
        };
        let mut lambda = 1.0;
        let mut next = None;
        for _ in 0..=MAX_HALVINGS {
            let u: Vec<f64> = (0..n).map(|j| x.u[j] + lambda * delta[j]).collect();
            let v: Vec<f64> = (0..n).map(|j| x.v[j] + lambda * delta[n + j]).collect();
            if let Ok(cand) = grid.pair(p, u, v) {
                if cand.residual < x.residual {
                    next = Some(cand);
                    break;
                }
                if next.is_none() && cand.residual.is_finite() {
                    next = Some(cand);
                }
            }
            lambda *= 0.5;
        }
        let Some(cand) = next else {
            return Err(Error::Diverged(format!("Newton step left the domain of f at iteration {it}")));
        };
        step = cand.distance(&x);
        if cand.residual >= x.residual {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                return Err(Error::Diverged(format!(
                    "Newton residual did not decrease for {STALL_LIMIT} steps (residual {:e})",
                    x.residual
                )));
            }
        } else {
            stalls = 0;
        }
        if !(cand.norm() <= BLOWUP) {
            return Err(Error::Diverged(format!("Newton iterate blew up (norm {:e})", cand.norm())));
        }
        x = cand;
    }
    Err(Error::Diverged(format!("Newton did not converge in {max_iter} steps (residual {:e})", x.residual)))
}

fn condition_estimate(jac: DMatrix<f64>) -> f64 {
    let sv = jac.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub label: String,
    pub u: f64,
    pub v: f64,
}

/// Constant starts between consecutive ladder bounds: below the first
/// level, between `L_k / c` and `L_(k+1)` for consecutive levels, and
/// between the last level and its `L / c`.
pub fn seeds(p: &ProblemSpec, ladder: &RadiiLadder, per_shell: usize) -> Vec<Seed> {
    let c = p.c();
    let levels: Vec<(Level, [f64; 2])> = ladder.levels().collect();
    let mut ranges: Vec<(String, [f64; 2], [f64; 2])> = Vec::new();
    if let Some((l, r)) = levels.first() {
        ranges.push((format!("below {}", l.name()), [0.0, 0.0], *r));
    }
    for w in levels.windows(2) {
        let (l0, r0) = w[0];
        let (l1, r1) = w[1];
        ranges.push((format!("{}..{}", l0.name(), l1.name()), [r0[0] / c[0], r0[1] / c[1]], r1));
    }
    if let Some((l, r)) = levels.last() {
        ranges.push((format!("above {}", l.name()), *r, [r[0] / c[0], r[1] / c[1]]));
    }
    if ranges.is_empty() {
        ranges.push(("unit".into(), [0.0, 0.0], [1.0, 1.0]));
    }
    let mut out = Vec::new();
    for (label, lo, hi) in ranges {
        for k in 1..=per_shell {
            let f = k as f64 / (per_shell + 1) as f64;
            out.push(Seed {
                label: format!("{label} #{k}"),
                u: lo[0] + f * (hi[0] - lo[0]),
                v: lo[1] + f * (hi[1] - lo[1]),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMembership {
    pub level: Level,
    pub radii: [f64; 2],
    /// `||u|| < rho_1` and `||v|| < rho_2`.
    pub in_k: bool,
    /// `min u < rho_1` and `min v < rho_2` on the cone intervals.
    pub in_v: bool,
    pub on_k_boundary: bool,
    pub on_v_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub sup: [f64; 2],
    pub min_on_interval: [f64; 2],
    pub levels: Vec<LevelMembership>,
    /// Labels of the given shells that contain the solution.
    pub shells: Vec<String>,
    pub cone: [ConeCheck; 2],
    pub in_cone: bool,
}

fn set_contains(set: &SetRef, sup: [f64; 2], min: [f64; 2], closed: bool) -> bool {
    let x = match set.kind {
        SetKind::K => sup,
        SetKind::V => min,
    };
    if closed {
        x[0] <= set.radii[0] && x[1] <= set.radii[1]
    } else {
        x[0] < set.radii[0] && x[1] < set.radii[1]
    }
}

pub fn localize(x: &GridFunctionPair, ladder: &RadiiLadder, shells: &[Shell]) -> Localization {
    let sup = x.norms;
    let min = [x.cone[0].min_on_interval, x.cone[1].min_on_interval];
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    let levels = ladder
        .levels()
        .map(|(level, r)| {
            let in_k = sup[0] < r[0] && sup[1] < r[1];
            let in_v = min[0] < r[0] && min[1] < r[1];
            let closed_k = sup[0] <= r[0] && sup[1] <= r[1];
            let closed_v = min[0] <= r[0] && min[1] <= r[1];
            LevelMembership {
                level,
                radii: r,
                in_k,
                in_v,
                on_k_boundary: closed_k && (rel(sup[0], r[0]) || rel(sup[1], r[1])),
                on_v_boundary: closed_v && (rel(min[0], r[0]) || rel(min[1], r[1])),
            }
        })
        .collect();
    let shells = shells
        .iter()
        .filter(|s| {
            set_contains(&s.outer, sup, min, s.outer.closed)
                && !s.inner.as_ref().is_some_and(|i| set_contains(i, sup, min, true))
        })
        .map(|s| s.label.clone())
        .collect();
    Localization {
        sup,
        min_on_interval: min,
        levels,
        shells,
        cone: x.cone,
        in_cone: x.cone[0].holds && x.cone[1].holds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub seed: Seed,
    pub path: String,
    pub iterations: usize,
    pub solution: GridFunctionPair,
    /// Sup distance to the solution recomputed on a grid with twice the cells.
    pub refinement_gap: Option<f64>,
    pub localization: Localization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub seed: Seed,
    pub path: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartReport {
    pub solutions: Vec<SolutionRecord>,
    pub trivial_found: bool,
    pub runs: usize,
    pub failures: Vec<RunFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<usize>,
    /// `found`, `not found numerically` or `no expectation`.
    pub status: String,
    pub settings: SolverSettings,
}

/// Runs Picard followed by Newton, and Newton alone, from every seed, keeps
/// the converged nontrivial solutions and removes duplicates.
pub fn multistart(
    p: &ProblemSpec,
    ladder: &RadiiLadder,
    settings: &SolverSettings,
    shells: &[Shell],
    expected: Option<usize>,
) -> Result<MultistartReport> {
    ladder.validate()?;
    let grid = SolverGrid::new(p, settings.cells)?;
    let seeds = seeds(p, ladder, settings.starts_per_shell.max(1));
    let jobs: Vec<(Seed, bool)> = seeds.iter().flat_map(|s| [(s.clone(), true), (s.clone(), false)]).collect();
    let runs: Vec<(Seed, String, Result<IterationOutcome>)> = jobs
        .par_iter()
        .map(|(seed, picard_first)| {
            let path = if *picard_first { "picard+newton" } else { "newton" };
            (seed.clone(), path.to_string(), run_one(p, &grid, seed, *picard_first, settings))
        })
        .collect();
    let mut kept: Vec<SolutionRecord> = Vec::new();
    let mut failures = Vec::new();
    let mut trivial_found = false;
    let total = runs.len();
    for (seed, path, res) in runs {
        match res {
            Ok(out) if out.solution.residual <= settings.report_threshold => {
                if out.solution.norm() <= settings.report_threshold {
                    trivial_found = true;
                    continue;
                }
                let dup = kept.iter().any(|k| {
                    let scale = k.solution.norm().max(out.solution.norm());
                    k.solution.distance(&out.solution) < settings.dedupe_tol * scale
                });
                if !dup {
                    let localization = localize(&out.solution, ladder, shells);
                    kept.push(SolutionRecord {
                        seed,
                        path,
                        iterations: out.iterations,
                        solution: out.solution,
                        refinement_gap: None,
                        localization,
                    });
                }
            }
            Ok(out) => failures.push(RunFailure {
                seed,
                path,
                error: format!("residual {:e} above report threshold", out.solution.residual),
            }),
            Err(e) => failures.push(RunFailure { seed, path, error: e.to_string() }),
        }
    }
    let fine = SolverGrid::new(p, 2 * settings.cells)?;
    for rec in kept.iter_mut() {
        rec.refinement_gap = refinement_gap(p, &fine, &rec.solution, settings).ok();
    }
    let status = match expected {
        Some(k) if kept.len() >= k => "found",
        Some(_) => "not found numerically",
        None => "no expectation",
    };
    Ok(MultistartReport {
        solutions: kept,
        trivial_found,
        runs: total,
        failures,
        expected,
        status: status.to_string(),
        settings: settings.clone(),
    })
}

fn run_one(
    p: &ProblemSpec,
    grid: &SolverGrid,
    seed: &Seed,
    picard_first: bool,
    s: &SolverSettings,
) -> Result<IterationOutcome> {
    let x0 = grid.constant(p, seed.u, seed.v)?;
    let mut iterations = 0;
    let start = if picard_first {
        let out = solve_picard(p, grid, &x0, s.damping, s.picard_tol, s.picard_max_iter)?;
        iterations = out.iterations;
        out.solution
    } else {
        x0
    };
    let mut out = solve_newton(p, grid, &start, s.newton_tol, s.newton_max_iter, s.fd_step)?;
    out.iterations += iterations;
    Ok(out)
}

fn refinement_gap(p: &ProblemSpec, fine: &SolverGrid, x: &GridFunctionPair, s: &SolverSettings) -> Result<f64> {
    let start = fine.resample(p, x)?;
    let out = solve_newton(p, fine, &start, s.newton_tol, s.newton_max_iter, s.fd_step)?;
    let y = &out.solution;
    let gap = x
        .nodes
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let du = (interp::eval(&y.nodes, &y.u, t) - x.u[j]).abs();
            let dv = (interp::eval(&y.nodes, &y.v, t) - x.v[j]).abs();
            du.max(dv)
        })
        .fold(0.0, f64::max);
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::kernel::KernelSpec;
    use crate::weight::WeightFunction;

    fn problem(f1: &str, f2: &str) -> ProblemSpec {
        let k1 = KernelSpec::three_point(-1.0, 0.5).unwrap();
        let k2 =
            KernelSpec::with_interval(crate::kernel::KernelVariant::Derivative { alpha: 0.25, xi: 0.25 }, 0.0, 0.25)
                .unwrap();
        let g = WeightFunction::one();
        ProblemSpec::new(
            None,
            [k1, k2],
            [g.clone(), g],
            [Expression::parse(f1).unwrap(), Expression::parse(f2).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn grid_contains_breakpoints() {
        let p = ProblemSpec::worked_example();
        let grid = SolverGrid::new(&p, 64).unwrap();
        for b in [0.0, 0.25, 0.5, 1.0] {
            assert!(grid.nodes().contains(&b));
        }
        assert!(grid.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_nonlinearity_maps_to_zero() {
        let p = problem("0", "0");
        let grid = SolverGrid::new(&p, 16).unwrap();
        let x = grid.constant(&p, 3.0, -2.0).unwrap();
        let y = grid.apply_t(&p, &x).unwrap();
        assert!(y.u.iter().chain(&y.v).all(|z| *z == 0.0));
        let out = solve_picard(&p, &grid, &x, 1.0, 1e-13, 10).unwrap();
        assert_eq!(out.solution.norm(), 0.0);
        assert!(out.iterations <= 2);
        let out = solve_newton(&p, &grid, &x, 1e-12, 10, 1e-7).unwrap();
        assert!(out.solution.norm() < 1e-12);
    }

    #[test]
    fn constant_f2_gives_closed_form() {
        let p = problem("0", "1");
        let grid = SolverGrid::new(&p, 64).unwrap();
        let x = grid.constant(&p, 0.0, 0.0).unwrap();
        let out = solve_picard(&p, &grid, &x, 1.0, 1e-13, 5).unwrap();
        for (t, v) in grid.nodes().iter().zip(&out.solution.v) {
            assert!((v - (7.0 / 16.0 - t * t / 2.0)).abs() < 1e-10);
        }
        assert!(out.iterations <= 2);
    }

    #[test]
    fn t_maps_cone_into_cone() {
        let p = ProblemSpec::worked_example();
        let grid = SolverGrid::new(&p, 32).unwrap();
        for (a, b) in [(0.1, 0.3), (1.0, 0.5), (2.0, 2.0)] {
            let x = grid.constant(&p, a, b).unwrap();
            let y = grid.apply_t(&p, &x).unwrap();
            assert!(y.cone[0].slack > -1e-8 && y.cone[1].slack > -1e-8, "{:?}", y.cone);
        }
    }

    #[test]
    fn linear_subcritical_has_only_zero() {
        let p = problem("0.5*abs(u)", "0.5*abs(v)");
        let grid = SolverGrid::new(&p, 32).unwrap();
        let x = grid.constant(&p, 0.3, 0.2).unwrap();
        let out = solve_newton(&p, &grid, &x, 1e-12, 20, 1e-7).unwrap();
        assert!(out.solution.norm() < 1e-10);
    }

    #[test]
    fn example_picard_then_newton() {
        let p = ProblemSpec::worked_example();
        let grid = SolverGrid::new(&p, 64).unwrap();
        let x = grid.constant(&p, 0.2, 0.2).unwrap();
        let pic = solve_picard(&p, &grid, &x, 1.0, 1e-13, 500).unwrap();
        assert!(pic.solution.residual <= 1e-10);
        assert!(pic.solution.norm() > 0.1);
        let newt = solve_newton(&p, &grid, &pic.solution, 1e-12, 20, 1e-7).unwrap();
        assert!(newt.solution.residual <= 1e-12);
        assert!(newt.solution.cone.iter().all(|c| c.holds));
    }

    #[test]
    fn localization_of_simple_pairs() {
        let p = problem("0", "0");
        let grid = SolverGrid::new(&p, 16).unwrap();
        let ladder = RadiiLadder { rho: Some([1.0, 1.0]), r: Some([2.0, 2.0]), ..Default::default() };
        let zero = grid.constant(&p, 0.0, 0.0).unwrap();
        let loc = localize(&zero, &ladder, &[]);
        assert!(loc.levels.iter().all(|l| l.in_k && l.in_v));
        let x = grid.constant(&p, 1.0, 1.0).unwrap();
        let loc = localize(&x, &ladder, &[]);
        assert!(loc.levels[0].on_v_boundary && !loc.levels[0].in_v);
        assert!(loc.levels[1].in_k);
    }

    #[test]
    fn seeds_cover_ladder_shells() {
        let p = ProblemSpec::worked_example();
        let s = seeds(&p, &RadiiLadder::worked_example(), 2);
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|x| x.u > 0.0 && x.v > 0.0));
    }

    #[test]
    fn multistart_trivial_and_dedupe() {
        let p = problem("0", "0");
        let settings = SolverSettings { cells: 16, ..Default::default() };
        let rep = multistart(&p, &RadiiLadder::worked_example(), &settings, &[], Some(1)).unwrap();
        assert!(rep.solutions.is_empty());
        assert!(rep.trivial_found);
        assert_eq!(rep.status, "not found numerically");
        let p = problem("1", "1");
        let rep = multistart(&p, &RadiiLadder::worked_example(), &settings, &[], None).unwrap();
        assert_eq!(rep.solutions.len(), 1);
        assert!(rep.solutions[0].refinement_gap.unwrap() < 1e-6);
    }

    #[test]
    fn csv_header() {
        let p = problem("0", "0");
        let grid = SolverGrid::new(&p, 8).unwrap();
        let csv = grid.constant(&p, 1.0, 2.0).unwrap().to_csv();
        assert!(csv.starts_with("t,u,v\n0.0,1.0,2.0\n"));
        assert_eq!(csv.lines().count(), grid.len() + 1);
    }
}
