//! Composite Gauss–Legendre integration split at breakpoints, and 1-D
//! sup/inf scans with golden-section refinement.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points per panel.
pub const ORDER: usize = 8;
/// Deepest refinement level tried by [`integrate`] (2^depth panels per piece).
pub const MAX_DEPTH: u32 = 12;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton's method from the Chebyshev-like guesses.
    pub fn new(n: usize) -> GaussLegendre {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order8() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(ORDER))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: each breakpoint piece of `[a,b]` is cut into `2^depth`
/// equal panels carrying the order-8 Gauss rule.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: Vec<(f64, f64)>,
    pub depth: u32,
}

impl PanelRule {
    pub fn new(a: f64, b: f64, breakpoints: &[f64], depth: u32) -> PanelRule {
        let edges = piece_edges(a, b, breakpoints);
        let per_piece = 1usize << depth;
        let mut panels = Vec::with_capacity((edges.len() - 1) * per_piece);
        for w in edges.windows(2) {
            let h = (w[1] - w[0]) / per_piece as f64;
            for k in 0..per_piece {
                let lo = w[0] + h * k as f64;
                let hi = if k + 1 == per_piece { w[1] } else { w[0] + h * (k + 1) as f64 };
                panels.push((lo, hi));
            }
        }
        PanelRule::from_panels(panels, depth)
    }

    /// Order-8 Gauss rule on each of the given panels.
    pub fn from_panels(panels: Vec<(f64, f64)>, depth: u32) -> PanelRule {
        let gl = GaussLegendre::order8();
        let mut nodes = Vec::with_capacity(panels.len() * ORDER);
        let mut weights = Vec::with_capacity(panels.len() * ORDER);
        for &(lo, hi) in &panels {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        PanelRule { nodes, weights, panels, depth }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `[a, bp..., b]` keeping only breakpoints strictly inside `(a, b)`.
pub fn piece_edges(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    edges
}

/// Integrates `f` over `[a,b]`, doubling the panels of every breakpoint piece
/// until two successive estimates differ by at most `tol * max(1, |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::invalid(format!("integration bounds must satisfy a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut prev = PanelRule::new(a, b, breakpoints, 0).integrate(&f);
    let mut diff = f64::INFINITY;
    for depth in 1..=MAX_DEPTH {
        let cur = PanelRule::new(a, b, breakpoints, depth).integrate(&f);
        if !cur.is_finite() {
            return Err(Error::invalid(format!("integrand is not finite on [{a}, {b}]")));
        }
        diff = (cur - prev).abs();
        if diff <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature { estimate: prev, achieved: diff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sup,
    Inf,
}

impl Mode {
    /// `true` when `a` is strictly better than `b` in this mode.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Mode::Sup => a > b,
            Mode::Inf => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
}

/// Grid scan of `grid_n + 1` equispaced points followed by golden-section
/// refinement inside the bracket around the best grid point. Ties go to the
/// leftmost point, and the refined point only replaces the grid winner when it
/// is strictly better.
pub fn extremize<F: Fn(f64) -> f64>(g: F, mode: Mode, a: f64, b: f64, grid_n: usize, refine_tol: f64) -> Extremum {
    match try_extremize(|t| Ok(g(t)), mode, a, b, grid_n, refine_tol) {
        Ok(e) => e,
        Err(_) => unreachable!("infallible scan function"),
    }
}

/// [`extremize`] for fallible scan functions.
pub fn try_extremize<F: Fn(f64) -> Result<f64>>(
    g: F,
    mode: Mode,
    a: f64,
    b: f64,
    grid_n: usize,
    refine_tol: f64,
) -> Result<Extremum> {
    let n = grid_n.max(16);
    if a == b {
        return Ok(Extremum { t: a, value: g(a)? });
    }
    let at = |k: usize| if k == n { b } else { a + (b - a) * k as f64 / n as f64 };
    let mut best = Extremum { t: a, value: g(a)? };
    let mut best_k = 0;
    for k in 1..=n {
        let t = at(k);
        let value = g(t)?;
        if mode.better(value, best.value) {
            best = Extremum { t, value };
            best_k = k;
        }
    }
    let (mut lo, mut hi) = (at(best_k.saturating_sub(1)), at((best_k + 1).min(n)));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut g1 = g(x1)?;
    let mut g2 = g(x2)?;
    while hi - lo > refine_tol {
        // keep the sub-bracket containing the better interior point
        if !mode.better(g2, g1) {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - ratio * (hi - lo);
            g1 = g(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + ratio * (hi - lo);
            g2 = g(x2)?;
        }
    }
    let (tc, gc) = if mode.better(g2, g1) { (x2, g2) } else { (x1, g1) };
    if mode.better(gc, best.value) {
        best = Extremum { t: tc, value: gc };
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn gauss_rule_properties() {
        let gl = GaussLegendre::order8();
        let sum: f64 = gl.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        assert!(gl.weights.iter().all(|&w| w > 0.0));
        // exact up to degree 15
        for deg in 0..=15 {
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let q: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(deg)).sum();
            assert!((q - exact).abs() < 1e-13, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn panels_tile_interval() {
        let rule = PanelRule::new(0.0, 1.0, &[0.3, 0.5, 0.3, 1.0], 2);
        assert_eq!(rule.panels.len(), 12);
        assert_eq!(rule.panels[0].0, 0.0);
        assert_eq!(rule.panels.last().unwrap().1, 1.0);
        for w in rule.panels.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        for (k, &(lo, hi)) in rule.panels.iter().enumerate() {
            let s: f64 = rule.weights[k * ORDER..(k + 1) * ORDER].iter().sum();
            assert!((s - (hi - lo)).abs() < 1e-15);
        }
    }

    #[test]
    fn integrates_simple_functions() {
        let v = integrate(|s| 1.0 - s, 0.0, 1.0, &[], 1e-10).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        let v = integrate(|s| E * E * (1.0 - s).powi(3), 0.0, 1.0, &[], 1e-10).unwrap();
        assert!((v - E * E / 4.0).abs() < 1e-12);
        assert_eq!(integrate(|s| s, 0.3, 0.3, &[], 1e-10).unwrap(), 0.0);
        assert!(integrate(|s| s, 0.5, 0.3, &[], 1e-10).is_err());
    }

    #[test]
    fn split_integral_of_abs_k1_at_t_one() {
        // k1(1,s) with alpha=-1, eta=1/2 is -1/4 on [0,1/2] and -(1-s)/2 on
        // [1/2,1], so |k1| integrates to 1/8 + 1/16.
        let k = crate::kernel::KernelSpec::three_point(-1.0, 0.5).unwrap();
        let v = integrate(|s| k.eval(1.0, s).abs(), 0.0, 1.0, &k.all_kinks(1.0), 1e-10).unwrap();
        assert!((v - 0.1875).abs() < 1e-13, "{v}");
    }

    #[test]
    fn refinement_error_non_increasing_on_smooth_integrand() {
        let f = |s: f64| (3.0 * s).sin() * (-s).exp();
        let exact = integrate(f, 0.0, 1.0, &[], 1e-15).unwrap();
        let mut last = f64::INFINITY;
        for depth in 0..4 {
            let err = (PanelRule::new(0.0, 1.0, &[], depth).integrate(f) - exact).abs();
            assert!(err <= last.max(1e-15));
            last = err;
        }
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let err = integrate(|s: f64| s.sin() / s.max(1e-300).powf(0.999), 0.0, 1.0, &[], 1e-15).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn extremize_examples() {
        let e = extremize(|t| t * (1.0 - t), Mode::Sup, 0.0, 1.0, 64, 1e-9);
        assert!((e.t - 0.5).abs() < 1e-8 && (e.value - 0.25).abs() < 1e-15);
        let e = extremize(|_| 3.0, Mode::Sup, 0.0, 1.0, 16, 1e-9);
        assert_eq!((e.t, e.value), (0.0, 3.0));
        let e = extremize(|_| 3.0, Mode::Inf, 0.0, 1.0, 16, 1e-9);
        assert_eq!((e.t, e.value), (0.0, 3.0));
        let e = extremize(|t| (t - 0.3).abs(), Mode::Inf, 0.0, 1.0, 50, 1e-10);
        assert!((e.t - 0.3).abs() < 1e-9);
    }

    #[test]
    fn extremize_dominates_grid() {
        let g = |t: f64| (7.0 * t).sin() + 0.3 * t;
        let e = extremize(g, Mode::Sup, 0.0, 2.0, 32, 1e-10);
        for k in 0..=32 {
            assert!(e.value >= g(2.0 * k as f64 / 32.0));
        }
        let e = extremize(g, Mode::Inf, 0.0, 2.0, 32, 1e-10);
        for k in 0..=32 {
            assert!(e.value <= g(2.0 * k as f64 / 32.0));
        }
    }
}
