//! Green's functions of the two nonlocal boundary value problems
//!
//! ```text
//! u'' + g f = 0,  u'(0) = 0,  alpha u(eta) = u(1)       (three-point, alpha < 0)
//! v'' + g f = 0,  v'(0) = 0,  v(1) = alpha v'(xi)       (derivative, 0 < alpha < 1 - xi)
//! ```
//!
//! together with their cone data: the bound `Phi(s) = 1 - s` with
//! `|k(t,s)| <= Phi(s)`, an interval `[a,b]` and a constant `c` with
//! `k(t,s) >= c Phi(s)` for `t` in `[a,b]`.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelVariant {
    /// `u(1) = alpha u(eta)`.
    ThreePoint { alpha: f64, eta: f64 },
    /// `v(1) = alpha v'(xi)`.
    Derivative { alpha: f64, xi: f64 },
}

impl KernelVariant {
    fn validate(&self) -> Result<()> {
        match *self {
            KernelVariant::ThreePoint { alpha, eta } => {
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::invalid(format!("three-point kernel requires 0 < eta < 1, got eta = {eta}")));
                }
                if !(alpha < 0.0) || !alpha.is_finite() {
                    return Err(Error::invalid(format!(
                        "three-point kernel requires alpha < 0 (sign-changing case), got alpha = {alpha}"
                    )));
                }
            }
            KernelVariant::Derivative { alpha, xi } => {
                if !(xi > 0.0 && xi < 1.0) {
                    return Err(Error::invalid(format!("derivative kernel requires 0 < xi < 1, got xi = {xi}")));
                }
                if !(alpha > 0.0 && alpha < 1.0 - xi) {
                    return Err(Error::invalid(format!(
                        "derivative kernel requires 0 < alpha < 1 - xi, got alpha = {alpha}, 1 - xi = {}",
                        1.0 - xi
                    )));
                }
            }
        }
        Ok(())
    }

    /// Interior point where the kernel changes formula independently of `t`.
    pub fn fixed_break(&self) -> f64 {
        match *self {
            KernelVariant::ThreePoint { eta, .. } => eta,
            KernelVariant::Derivative { xi, .. } => xi,
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            KernelVariant::ThreePoint { alpha, .. } | KernelVariant::Derivative { alpha, .. } => alpha,
        }
    }

    /// Cone constant `c`.
    pub fn cone_constant(&self) -> f64 {
        match *self {
            KernelVariant::ThreePoint { alpha, eta } => (1.0 - eta) / (1.0 - alpha),
            KernelVariant::Derivative { alpha, xi } => 1.0 - alpha - xi,
        }
    }

    /// Affine coefficients `(A, B)` with `k(t,s) = A + B s` on the branch
    /// selected by `(s <= fixed_break, s <= t)`.
    fn branch(&self, t: f64, below_break: bool, below_t: bool) -> (f64, f64) {
        let (mut a, mut b) = match *self {
            KernelVariant::ThreePoint { alpha, eta } => {
                let q = 1.0 / (1.0 - alpha);
                if below_break {
                    (q - alpha * q * eta, -q + alpha * q)
                } else {
                    (q, -q)
                }
            }
            KernelVariant::Derivative { alpha, .. } => {
                if below_break {
                    (1.0 - alpha, -1.0)
                } else {
                    (1.0, -1.0)
                }
            }
        };
        if below_t {
            a -= t;
            b += 1.0;
        }
        (a, b)
    }
}

/// A kernel variant with its cone interval `[a,b]` and constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub variant: KernelVariant,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl KernelSpec {
    /// Builds a kernel with the closed-form optimal interval (the one for
    /// `g = 1`) as its default `[a,b]`.
    pub fn new(variant: KernelVariant) -> Result<KernelSpec> {
        variant.validate()?;
        let opt = bounds::optimal_interval_for(&variant);
        KernelSpec::with_interval(variant, opt.a, opt.b)
    }

    pub fn three_point(alpha: f64, eta: f64) -> Result<KernelSpec> {
        KernelSpec::new(KernelVariant::ThreePoint { alpha, eta })
    }

    pub fn derivative(alpha: f64, xi: f64) -> Result<KernelSpec> {
        KernelSpec::new(KernelVariant::Derivative { alpha, xi })
    }

    pub fn with_interval(variant: KernelVariant, a: f64, b: f64) -> Result<KernelSpec> {
        variant.validate()?;
        let upper = variant.fixed_break();
        if !(a >= 0.0 && a < b && b <= upper) {
            let name = match variant {
                KernelVariant::ThreePoint { .. } => "eta",
                KernelVariant::Derivative { .. } => "xi",
            };
            return Err(Error::invalid(format!(
                "cone interval must satisfy 0 <= a < b <= {name} = {upper}, got [{a}, {b}]"
            )));
        }
        let c = variant.cone_constant();
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::invalid(format!("cone constant c = {c} not in (0, 1]")));
        }
        Ok(KernelSpec { variant, a, b, c })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `k(t,s)`. The `s <= t` and `s <= eta`/`s <= xi` branches are closed.
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let brk = self.variant.fixed_break();
        let mut k = match self.variant {
            KernelVariant::ThreePoint { alpha, eta } => {
                let q = 1.0 / (1.0 - alpha);
                let mut k = q * (1.0 - s);
                if s <= eta {
                    k -= alpha * q * (eta - s);
                }
                k
            }
            KernelVariant::Derivative { alpha, .. } => {
                let mut k = 1.0 - s;
                if s <= brk {
                    k -= alpha;
                }
                k
            }
        };
        if s <= t {
            k -= t - s;
        }
        k
    }

    pub fn positive_part(&self, t: f64, s: f64) -> f64 {
        self.eval(t, s).max(0.0)
    }

    pub fn negative_part(&self, t: f64, s: f64) -> f64 {
        (-self.eval(t, s)).max(0.0)
    }

    /// `Phi(s) = 1 - s`, the same for both variants.
    pub fn phi_upper(&self, s: f64) -> f64 {
        1.0 - s
    }

    /// Sorted interior points of `(0,1)` where `k(t, .)` kinks or jumps.
    pub fn breakpoints(&self, t: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = [t, self.variant.fixed_break()].into_iter().filter(|&p| p > 0.0 && p < 1.0).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Interior zeros of `s -> k(t,s)` strictly inside the affine pieces
    /// delimited by [`breakpoints`](Self::breakpoints), solved in closed form.
    pub fn zero_crossings(&self, t: f64) -> Vec<f64> {
        let mut edges = vec![0.0];
        edges.extend(self.breakpoints(t));
        edges.push(1.0);
        let brk = self.variant.fixed_break();
        let mut zeros = Vec::new();
        for w in edges.windows(2) {
            let (p, q) = (w[0], w[1]);
            let mid = 0.5 * (p + q);
            let (a, b) = self.variant.branch(t, mid <= brk, mid <= t);
            if b != 0.0 {
                let z = -a / b;
                if z > p && z < q {
                    zeros.push(z);
                }
            }
        }
        zeros
    }

    /// Breakpoints and zero crossings together, sorted.
    pub fn all_kinks(&self, t: f64) -> Vec<f64> {
        let mut pts = self.breakpoints(t);
        pts.extend(self.zero_crossings(t));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}
