//! Nyström discretization of the linear operators
//!
//! ```text
//! L u(t)   = int_0^1 |k(t,s)| g(s) u(s) ds
//! L+ u(t)  = int_a^b  k+(t,s) g(s) u(s) ds
//! ```
//!
//! and their spectral radii by power iteration.
//!
//! The kernels kink at `s = t`, so the plain Nyström rule loses accuracy on
//! the diagonal. Each row is corrected by adding the difference between the
//! exact row integral `int kappa(t_i, s) ds` and the discrete row sum to the
//! diagonal entry, which makes the rule exact on constants.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::{integrate, piece_edges, PanelRule, ORDER};
use crate::weight::WeightFunction;

/// Below this the spectral radius is reported as zero.
pub const DEGENERATE_RADIUS: f64 = 1e-14;
/// Componentwise slack of the Collatz test.
pub const COLLATZ_TOL: f64 = 1e-12;

const ROW_INTEGRAL_TOL: f64 = 1e-13;

/// A nonnegative kernel `kappa(t,s)` (weight included) on a square domain.
pub trait WeightedKernel: Sync {
    fn value(&self, t: f64, s: f64) -> f64;
    /// Points of `s -> kappa(t,s)` where the integrand is not smooth.
    fn kinks(&self, t: f64) -> Vec<f64>;
    /// Break points independent of `t`, used to lay out panels.
    fn fixed_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Abs,
    PositivePart,
}

/// `|k| g` or `k+ g` for one of the boundary value kernels.
pub struct KernelOperator<'a> {
    pub kernel: &'a KernelSpec,
    pub g: &'a WeightFunction,
    pub mode: KernelMode,
}

impl WeightedKernel for KernelOperator<'_> {
    fn value(&self, t: f64, s: f64) -> f64 {
        let k = self.kernel.eval(t, s);
        let k = match self.mode {
            KernelMode::Abs => k.abs(),
            KernelMode::PositivePart => k.max(0.0),
        };
        k * self.g.eval(s)
    }

    fn kinks(&self, t: f64) -> Vec<f64> {
        self.kernel.all_kinks(t)
    }

    fn fixed_breaks(&self) -> Vec<f64> {
        vec![self.kernel.variant.fixed_break()]
    }
}

/// Green's function of `-u'' = f`, `u(0) = u(1) = 0`; eigenvalues `1/(k pi)^2`.
pub struct DirichletGreen;

impl WeightedKernel for DirichletGreen {
    fn value(&self, t: f64, s: f64) -> f64 {
        if s <= t {
            s * (1.0 - t)
        } else {
            t * (1.0 - s)
        }
    }

    fn kinks(&self, t: f64) -> Vec<f64> {
        vec![t]
    }
}

#[derive(Debug, Clone)]
pub struct NystromMatrix {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `A[i][j] = kappa(t_i, t_j) w_j`, diagonal corrected.
    pub matrix: DMatrix<f64>,
    pub domain: (f64, f64),
    pub mode: Option<KernelMode>,
}

impl NystromMatrix {
    /// Wraps an explicit nonnegative matrix (used for small test operators).
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<NystromMatrix> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::invalid("Nyström matrix must be square and nonempty"));
        }
        if matrix.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::invalid("Nyström matrix entries must be nonnegative"));
        }
        let n = matrix.nrows();
        let nodes = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        Ok(NystromMatrix { nodes, weights: vec![1.0 / n as f64; n], matrix, domain: (0.0, 1.0), mode: None })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }
}

/// Composite Gauss panels over `[lo, hi]`, split at `breaks`, with about
/// `n / 8` panels distributed by piece length.
pub fn panel_layout(lo: f64, hi: f64, breaks: &[f64], n: usize) -> PanelRule {
    let edges = piece_edges(lo, hi, breaks);
    let total_panels = (n / ORDER).max(1);
    let len = hi - lo;
    let mut panels = Vec::new();
    for w in edges.windows(2) {
        let k = ((total_panels as f64 * (w[1] - w[0]) / len).round() as usize).max(1);
        let h = (w[1] - w[0]) / k as f64;
        for j in 0..k {
            let p = w[0] + h * j as f64;
            let q = if j + 1 == k { w[1] } else { w[0] + h * (j + 1) as f64 };
            panels.push((p, q));
        }
    }
    PanelRule::from_panels(panels, 0)
}

/// Discretizes a generic weighted kernel on `[lo, hi]` with about `n` nodes.
pub fn discretize_kernel<K: WeightedKernel>(kernel: &K, lo: f64, hi: f64, n: usize) -> Result<NystromMatrix> {
    if n < ORDER {
        return Err(Error::invalid(format!("Nyström grid needs at least {ORDER} nodes, got {n}")));
    }
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(Error::invalid(format!("invalid Nyström domain [{lo}, {hi}]")));
    }
    let rule = panel_layout(lo, hi, &kernel.fixed_breaks(), n);
    let nodes = rule.nodes;
    let weights = rule.weights;
    let size = nodes.len();
    let rows: Vec<Result<Vec<f64>>> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row: Vec<f64> = nodes.iter().zip(&weights).map(|(&s, &w)| kernel.value(t, s) * w).collect();
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::invalid(format!("kernel is negative or not finite in row t = {t}")));
            }
            let exact = integrate(|s| kernel.value(t, s), lo, hi, &kernel.kinks(t), ROW_INTEGRAL_TOL)?;
            let sum: f64 = row.iter().sum();
            // tiny negative results are rounding noise of the correction
            row[i] = (row[i] + exact - sum).max(0.0);
            Ok(row)
        })
        .collect();
    let mut matrix = DMatrix::zeros(size, size);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, x) in row?.into_iter().enumerate() {
            matrix[(i, j)] = x;
        }
    }
    Ok(NystromMatrix { nodes, weights, matrix, domain: (lo, hi), mode: None })
}

/// Discretizes `|k| g` or `k+ g` on `domain`.
pub fn discretize(
    kernel: &KernelSpec,
    g: &WeightFunction,
    mode: KernelMode,
    domain: (f64, f64),
    n: usize,
) -> Result<NystromMatrix> {
    let (lo, hi) = domain;
    if mode == KernelMode::PositivePart && (lo, hi) != (0.0, 1.0) && hi > kernel.variant.fixed_break() {
        return Err(Error::invalid(format!(
            "restricted positive-part domain [{lo}, {hi}] must lie inside [0, {}]",
            kernel.variant.fixed_break()
        )));
    }
    let op = KernelOperator { kernel, g, mode };
    let mut a = discretize_kernel(&op, lo, hi, n)?;
    a.mode = Some(mode);
    Ok(a)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Spectral radius estimate.
    pub r: f64,
    /// `1/r`, absent when `r` is degenerate.
    pub mu: Option<f64>,
    pub eigvec: Vec<f64>,
    pub nodes: Vec<f64>,
    pub iterations: usize,
    pub n: usize,
    pub degenerate: bool,
    /// `min_i (A x)_i / x_i` and `max_i (A x)_i / x_i` at the final iterate.
    pub collatz_bracket: (f64, f64),
}

/// Power iteration from the all-ones vector with sup-norm normalization.
pub fn spectral_radius(a: &NystromMatrix, tol: f64, max_iter: usize) -> Result<SpectralResult> {
    let n = a.len();
    let stop = tol.max(64.0 * f64::EPSILON);
    let mut x = DVector::from_element(n, 1.0);
    let mut q_prev = f64::NAN;
    let mut q = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let y = a.apply(&x);
        q = y.amax();
        if q < DEGENERATE_RADIUS {
            return Ok(SpectralResult {
                r: 0.0,
                mu: None,
                eigvec: x.iter().copied().collect(),
                nodes: a.nodes.clone(),
                iterations,
                n,
                degenerate: true,
                collatz_bracket: (0.0, q),
            });
        }
        x = y / q;
        if (q - q_prev).abs() <= stop * q {
            converged = true;
            break;
        }
        q_prev = q;
    }
    if !converged {
        return Err(Error::PowerIteration { iterations, last: q });
    }
    let ax = a.apply(&x);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (y, xi) in ax.iter().zip(x.iter()) {
        if *xi > 0.0 {
            lo = lo.min(y / xi);
            hi = hi.max(y / xi);
        } else {
            lo = 0.0;
            hi = f64::INFINITY;
        }
    }
    Ok(SpectralResult {
        r: q,
        mu: Some(1.0 / q),
        eigvec: x.iter().copied().collect(),
        nodes: a.nodes.clone(),
        iterations,
        n,
        degenerate: false,
        collatz_bracket: (lo, hi),
    })
}

/// `true` when `lambda w >= A w` componentwise (up to [`COLLATZ_TOL`]), which
/// certifies `r(A) <= lambda` for the matrix.
pub fn collatz_upper_bound(a: &NystromMatrix, w: &[f64], lambda: f64) -> bool {
    if w.len() != a.len() || w.iter().any(|x| *x < 0.0) || w.iter().all(|x| *x == 0.0) {
        return false;
    }
    let w = DVector::from_column_slice(w);
    let aw = a.apply(&w);
    aw.iter().zip(w.iter()).all(|(y, x)| lambda * x >= y - COLLATZ_TOL)
}

/// One component of the resolvent bound.
pub struct ResolventInput<'a> {
    pub matrix: &'a NystromMatrix,
    /// Spectral radius of `matrix`.
    pub r: f64,
    pub mu: f64,
    /// The envelope constant `C`.
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventBound {
    pub r0: f64,
    pub per_component: Vec<f64>,
    /// Every solution vector was nonnegative.
    pub positive: bool,
}

/// `R0 = max_i || (I - (mu_i - eps) A_i)^{-1} C_i ||_inf` by direct solves.
pub fn resolvent_bound_r0(inputs: &[ResolventInput<'_>], eps: f64) -> Result<ResolventBound> {
    let mut per = Vec::with_capacity(inputs.len());
    let mut positive = true;
    for inp in inputs {
        let x = resolvent_solve(inp.matrix, inp.r, inp.mu - eps, inp.c)?;
        positive &= x.iter().all(|v| *v >= -1e-12 * inp.c.abs().max(1.0));
        per.push(x.amax());
    }
    let r0 = per.iter().copied().fold(0.0, f64::max);
    Ok(ResolventBound { r0, per_component: per, positive })
}

/// Solves `(I - lambda A) x = c 1`.
pub fn resolvent_solve(a: &NystromMatrix, r: f64, lambda: f64, c: f64) -> Result<DVector<f64>> {
    let rho = lambda * r;
    if !(rho < 1.0) {
        return Err(Error::NeumannDivergent(rho));
    }
    let n = a.len();
    let rhs = DVector::from_element(n, c);
    if c == 0.0 {
        return Ok(rhs);
    }
    let m = DMatrix::identity(n, n) - &a.matrix * lambda;
    m.lu().solve(&rhs).ok_or(Error::SingularJacobian(f64::INFINITY))
}

/// Partial sum `sum_{k < terms} (lambda A)^k c 1` of the Neumann series.
pub fn neumann_partial_sum(a: &NystromMatrix, lambda: f64, c: f64, terms: usize) -> DVector<f64> {
    let n = a.len();
    let mut term = DVector::from_element(n, c);
    let mut sum = term.clone();
    for _ in 1..terms {
        term = a.apply(&term) * lambda;
        sum += &term;
    }
    sum
}
