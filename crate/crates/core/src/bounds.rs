//! The growth thresholds `m` and `M(a,b)` of a kernel against a weight, and
//! optimal cone intervals.
//!
//! ```text
//! 1/m      = sup_{t in [0,1]} int_0^1 |k(t,s)| g(s) ds
//! 1/M(a,b) = inf_{t in [a,b]} int_a^b  k(t,s)  g(s) ds
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, KernelVariant};
use crate::quadrature::{integrate, try_extremize, Mode};
use crate::weight::WeightFunction;

/// Agreement required between closed-form and numeric values when both apply.
pub const CROSS_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub witness_t: f64,
    pub method: Method,
    pub estimated_error: f64,
}

/// Tolerances for the scan functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub tol: f64,
    pub grid_n: usize,
    pub refine_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { tol: 1e-10, grid_n: 256, refine_tol: 1e-9 }
    }
}

impl ScanOptions {
    pub fn with_tol(tol: f64) -> Self {
        ScanOptions { tol, ..Default::default() }
    }
}

/// Which part of the kernel enters the `m` integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Abs,
    Positive,
    Negative,
}

fn integral_over(
    kernel: &KernelSpec,
    g: &WeightFunction,
    t: f64,
    lo: f64,
    hi: f64,
    part: Part,
    tol: f64,
) -> Result<f64> {
    let kinks = kernel.all_kinks(t);
    integrate(
        |s| {
            let k = kernel.eval(t, s);
            let k = match part {
                Part::Abs => k.abs(),
                Part::Positive => k.max(0.0),
                Part::Negative => (-k).max(0.0),
            };
            k * g.eval(s)
        },
        lo,
        hi,
        &kinks,
        tol,
    )
}

fn signed_integral(kernel: &KernelSpec, g: &WeightFunction, t: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    integrate(|s| kernel.eval(t, s) * g.eval(s), lo, hi, &kernel.breakpoints(t), tol)
}

fn reciprocal(sup: f64, t: f64, what: &str, opts: &ScanOptions) -> Result<BoundResult> {
    if !(sup > 0.0) {
        return Err(Error::ZeroDenominator(format!(
            "sup over t of the {what} integral is {sup:e}; the weight carries no mass"
        )));
    }
    let value = 1.0 / sup;
    Ok(BoundResult {
        value,
        witness_t: t,
        method: Method::Numeric,
        estimated_error: value * opts.tol * sup.max(1.0) / sup,
    })
}

/// `m = 1 / sup_t int_0^1 |k(t,s)| g(s) ds`.
pub fn compute_m(kernel: &KernelSpec, g: &WeightFunction, opts: &ScanOptions) -> Result<BoundResult> {
    let best = try_extremize(
        |t| integral_over(kernel, g, t, 0.0, 1.0, Part::Abs, opts.tol),
        Mode::Sup,
        0.0,
        1.0,
        opts.grid_n,
        opts.refine_tol,
    )?;
    reciprocal(best.value, best.t, "|k| g", opts)
}

/// The relaxed threshold `1 / sup_t max(int k+ g, int k- g)`, never below
/// [`compute_m`].
pub fn compute_m_refined(kernel: &KernelSpec, g: &WeightFunction, opts: &ScanOptions) -> Result<BoundResult> {
    let best = try_extremize(
        |t| {
            let p = integral_over(kernel, g, t, 0.0, 1.0, Part::Positive, opts.tol)?;
            let n = integral_over(kernel, g, t, 0.0, 1.0, Part::Negative, opts.tol)?;
            Ok(p.max(n))
        },
        Mode::Sup,
        0.0,
        1.0,
        opts.grid_n,
        opts.refine_tol,
    )?;
    reciprocal(best.value, best.t, "k+ g / k- g", opts)
}

/// `M(a,b) = 1 / inf_{t in [a,b]} int_a^b k(t,s) g(s) ds`.
pub fn compute_big_m(
    kernel: &KernelSpec,
    g: &WeightFunction,
    a: f64,
    b: f64,
    opts: &ScanOptions,
) -> Result<BoundResult> {
    check_positivity_range(kernel, a, b)?;
    let inf = inf_interval_integral(kernel, g, a, b, opts)?;
    if !(inf.1 > 0.0) {
        return Err(Error::NotPositive { a, b, value: inf.1 });
    }
    let value = 1.0 / inf.1;
    Ok(BoundResult {
        value,
        witness_t: inf.0,
        method: Method::Numeric,
        estimated_error: value * opts.tol * inf.1.max(1.0) / inf.1,
    })
}

fn check_positivity_range(kernel: &KernelSpec, a: f64, b: f64) -> Result<()> {
    let upper = kernel.variant.fixed_break();
    if !(a >= 0.0 && a < b && b <= upper) {
        return Err(Error::invalid(format!("interval [{a}, {b}] must satisfy 0 <= a < b <= {upper} for this kernel")));
    }
    Ok(())
}

/// `(t*, inf_{t in [a,b]} int_a^b k(t,s) g(s) ds)`.
fn inf_interval_integral(
    kernel: &KernelSpec,
    g: &WeightFunction,
    a: f64,
    b: f64,
    opts: &ScanOptions,
) -> Result<(f64, f64)> {
    let e = try_extremize(
        |t| signed_integral(kernel, g, t, a, b, opts.tol),
        Mode::Inf,
        a,
        b,
        opts.grid_n,
        opts.refine_tol,
    )?;
    Ok((e.t, e.value))
}

/// `1/m` for `g = 1` from the explicit scan functions.
pub fn closed_form_inv_m(variant: &KernelVariant) -> (f64, f64) {
    match *variant {
        KernelVariant::ThreePoint { alpha, eta } => {
            let test = -2.0 * alpha * eta * eta + alpha + 1.0;
            if test >= 0.0 {
                (0.0, vartheta1(alpha, eta, 0.0))
            } else {
                (1.0, vartheta2(alpha, eta, 1.0))
            }
        }
        KernelVariant::Derivative { alpha, xi } => (0.0, theta1(alpha, xi, 0.0)),
    }
}

/// Scan function of the three-point kernel for `t <= (1 - alpha eta)/(1 - alpha)`.
pub fn vartheta1(alpha: f64, eta: f64, t: f64) -> f64 {
    let e2 = eta * eta;
    -t * t / 2.0 + (e2 / 2.0 - alpha * e2 + 0.5) / (1.0 - alpha) - e2 / 2.0
}

/// Scan function of the three-point kernel beyond its sign switch.
pub fn vartheta2(alpha: f64, eta: f64, t: f64) -> f64 {
    (2.0 - alpha) / (-2.0 * alpha) * t * t
        + 2.0 / alpha * t
        + (2.0 - alpha - alpha * alpha * eta * eta) / (-2.0 * alpha * (1.0 - alpha))
}

/// Scan function of the derivative kernel on `[0, xi]`.
pub fn theta1(alpha: f64, xi: f64, t: f64) -> f64 {
    -t * t / 2.0 - alpha * xi + 0.5
}

/// `m` for `g = 1` in closed form.
pub fn closed_form_m(kernel: &KernelSpec) -> BoundResult {
    let (t, inv) = closed_form_inv_m(&kernel.variant);
    BoundResult { value: 1.0 / inv, witness_t: t, method: Method::ClosedForm, estimated_error: 0.0 }
}

/// A cone interval `[a,b]` and the associated `M(a,b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalInterval {
    pub a: f64,
    pub b: f64,
    /// `1/M(a,b)`.
    pub inv_big_m: f64,
    /// `M(a,b)`.
    pub big_m: f64,
    pub method: Method,
}

/// Closed-form optimal interval for `g = 1`.
pub fn optimal_interval_for(variant: &KernelVariant) -> OptimalInterval {
    let (b, inv) = match *variant {
        KernelVariant::ThreePoint { alpha, eta } => {
            let peak = (1.0 - alpha * eta) / (1.0 - alpha);
            let b = (peak / 2.0).min(eta);
            (b, (peak - b) * b)
        }
        KernelVariant::Derivative { alpha, xi } => {
            let b = ((1.0 - alpha) / 2.0).min(xi);
            (b, (1.0 - alpha) * b - b * b)
        }
    };
    OptimalInterval { a: 0.0, b, inv_big_m: inv, big_m: 1.0 / inv, method: Method::ClosedForm }
}

pub fn optimal_interval(kernel: &KernelSpec) -> OptimalInterval {
    optimal_interval_for(&kernel.variant)
}

/// Maximizes `1/M(0,b)` over `b` in `(0, eta]` (or `(0, xi]`). With
/// `general_a` the left endpoint is also searched on a coarse grid and kept
/// only when it beats `a = 0`.
pub fn optimal_interval_numeric(
    kernel: &KernelSpec,
    g: &WeightFunction,
    general_a: bool,
    opts: &ScanOptions,
) -> Result<OptimalInterval> {
    let upper = kernel.variant.fixed_break();
    let inner = ScanOptions { grid_n: opts.grid_n.min(64), ..*opts };
    let objective = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        Ok(inf_interval_integral(kernel, g, a, b, &inner)?.1)
    };
    let best = try_extremize(|b| objective(0.0, b), Mode::Sup, 0.0, upper, opts.grid_n.min(128), opts.refine_tol)?;
    let (mut a_best, mut b_best, mut inv_best) = (0.0, best.t, best.value);
    if general_a {
        let n = 24;
        for i in 1..n {
            let a = upper * i as f64 / n as f64;
            let e = try_extremize(|b| objective(a, b), Mode::Sup, a, upper, 32, opts.refine_tol)?;
            if e.value > inv_best {
                (a_best, b_best, inv_best) = (a, e.t, e.value);
            }
        }
    }
    if !(inv_best > 0.0) {
        return Err(Error::NotPositive { a: a_best, b: b_best, value: inv_best });
    }
    Ok(OptimalInterval { a: a_best, b: b_best, inv_big_m: inv_best, big_m: 1.0 / inv_best, method: Method::Numeric })
}

/// Relative discrepancy `|x - y| / max(|x|, |y|)`.
pub fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// For `g = 1`, compares the numeric `m` against the closed form and fails
/// with an internal error when they disagree beyond [`CROSS_CHECK_TOL`].
pub fn cross_check_m(kernel: &KernelSpec, numeric: &BoundResult) -> Result<BoundResult> {
    let closed = closed_form_m(kernel);
    let gap = relative_gap(closed.value, numeric.value);
    if gap > CROSS_CHECK_TOL {
        return Err(Error::Internal(format!(
            "closed-form m = {} and numeric m = {} differ by {gap:e} (relative)",
            closed.value, numeric.value
        )));
    }
    Ok(closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn example_weight() -> WeightFunction {
        WeightFunction::parse("e^2*(1-t)^2").unwrap()
    }

    fn k1() -> KernelSpec {
        KernelSpec::with_interval(KernelVariant::ThreePoint { alpha: -1.0, eta: 0.5 }, 0.0, 0.25).unwrap()
    }

    fn k2() -> KernelSpec {
        KernelSpec::with_interval(KernelVariant::Derivative { alpha: 0.25, xi: 0.25 }, 0.0, 0.25).unwrap()
    }

    fn rel(x: f64, y: f64) -> f64 {
        relative_gap(x, y)
    }

    #[test]
    fn example_m_values() {
        let o = ScanOptions::default();
        let m1 = compute_m(&k1(), &example_weight(), &o).unwrap();
        assert!(rel(m1.value, 384.0 / (65.0 * E * E)) < 1e-9, "{m1:?}");
        assert!(m1.witness_t < 1e-6);
        let m2 = compute_m(&k2(), &example_weight(), &o).unwrap();
        assert!(rel(m2.value, 768.0 / (155.0 * E * E)) < 1e-9, "{m2:?}");
    }

    #[test]
    fn example_big_m_values() {
        let o = ScanOptions::default();
        let target = 384.0 / (37.0 * E * E);
        for k in [k1(), k2()] {
            let r = compute_big_m(&k, &example_weight(), 0.0, 0.25, &o).unwrap();
            assert!(rel(r.value, target) < 1e-9, "{r:?}");
            assert_eq!(r.witness_t, 0.25);
        }
    }

    #[test]
    fn unit_weight_m_matches_closed_form() {
        let k = KernelSpec::derivative(0.25, 0.25).unwrap();
        let m = compute_m(&k, &WeightFunction::one(), &ScanOptions::default()).unwrap();
        assert!(rel(m.value, 16.0 / 7.0) < 1e-9);
        assert!(cross_check_m(&k, &m).is_ok());
    }

    #[test]
    fn closed_forms() {
        let k = KernelSpec::three_point(-1.0, 0.5).unwrap();
        assert!((1.0 / closed_form_m(&k).value - 5.0 / 16.0).abs() < 1e-15);
        let k = KernelSpec::derivative(0.25, 0.25).unwrap();
        assert!((1.0 / closed_form_m(&k).value - 7.0 / 16.0).abs() < 1e-15);
        let k = KernelSpec::derivative(1e-12, 0.5).unwrap();
        assert!((1.0 / closed_form_m(&k).value - 0.5).abs() < 1e-11);
    }

    #[test]
    fn second_scan_branch_matches_numeric() {
        // -2 alpha eta^2 + alpha + 1 < 0 for alpha = -5, eta = 0.3
        let k = KernelSpec::three_point(-5.0, 0.3).unwrap();
        let closed = closed_form_m(&k);
        assert_eq!(closed.witness_t, 1.0);
        let numeric = compute_m(&k, &WeightFunction::one(), &ScanOptions::default()).unwrap();
        assert!(rel(closed.value, numeric.value) < 1e-9);
    }

    #[test]
    fn optimal_interval_closed_forms() {
        let o = optimal_interval(&KernelSpec::three_point(-1.0, 0.5).unwrap());
        assert_eq!((o.a, o.b), (0.0, 0.375));
        assert!((o.inv_big_m - 9.0 / 64.0).abs() < 1e-15);
        let o = optimal_interval(&KernelSpec::derivative(0.25, 0.25).unwrap());
        assert_eq!(o.b, 0.25);
        assert!((o.inv_big_m - 0.125).abs() < 1e-15);
        let o = optimal_interval_for(&KernelVariant::Derivative { alpha: 0.5, xi: 0.45 });
        assert_eq!(o.b, 0.25);
    }

    #[test]
    fn optimal_interval_numeric_matches_closed_form() {
        let o = ScanOptions::default();
        for k in [KernelSpec::three_point(-1.0, 0.5).unwrap(), KernelSpec::derivative(0.25, 0.25).unwrap()] {
            let closed = optimal_interval(&k);
            let num = optimal_interval_numeric(&k, &WeightFunction::one(), false, &o).unwrap();
            assert!((closed.b - num.b).abs() < 1e-6, "{closed:?} {num:?}");
            assert!(rel(closed.big_m, num.big_m) < 1e-8);
        }
    }

    #[test]
    fn refined_dominates() {
        let o = ScanOptions::default();
        for (k, g) in [(KernelSpec::three_point(-1.0, 0.5).unwrap(), WeightFunction::one()), (k2(), example_weight())] {
            let m = compute_m(&k, &g, &o).unwrap();
            let r = compute_m_refined(&k, &g, &o).unwrap();
            assert!(r.value >= m.value * (1.0 - 1e-12));
        }
    }

    #[test]
    fn m_below_big_m() {
        let o = ScanOptions::default();
        let g = example_weight();
        for (a, b) in [(0.0, 0.25), (0.1, 0.2), (0.0, 0.1)] {
            let m = compute_m(&k1(), &g, &o).unwrap().value;
            let big = compute_big_m(&k1(), &g, a, b, &o).unwrap().value;
            assert!(m <= big);
        }
    }

    #[test]
    fn zero_weight_errors() {
        let o = ScanOptions::default();
        let z = WeightFunction::constant(0.0).unwrap();
        assert!(matches!(compute_m(&k1(), &z, &o), Err(Error::ZeroDenominator(_))));
        assert!(matches!(compute_big_m(&k1(), &z, 0.0, 0.25, &o), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn numeric_interval_with_massless_prefix() {
        let g = WeightFunction::parse("max(t - 0.1, 0)").unwrap();
        let k = KernelSpec::three_point(-1.0, 0.5).unwrap();
        let o = optimal_interval_numeric(&k, &g, false, &ScanOptions::default()).unwrap();
        assert!(o.b > 0.1);
    }
}
