//! Reduction of radial solutions of an elliptic system on the annulus
//! `R1 < |x| < R0` in `R^n` to a system on `[0,1]`.
//!
//! With `gamma = R0^-(n-2)`, `beta = R1^-(n-2)` the substitution is
//!
//! ```text
//! n >= 3:  r(t) = (gamma + (beta - gamma) t)^(-1/(n-2))
//! n  = 2:  r(t) = R0^(1-t) R1^t
//! ```
//!
//! and the weights become `g_i(t) = phi(t) h_i(r(t))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, Var};
use crate::interp;
use crate::weight::WeightFunction;

const BISECTION_TOL: f64 = 1e-14;

/// How `phi` is formed when `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    /// `(log(R0/R1))^2 r(t)^2 = r'(t)^2`.
    #[default]
    Derived,
    /// `(R0 (1-t) log(R0/R1))^2`.
    PaperPrinted,
}

impl std::str::FromStr for PhiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(PhiMode::Derived),
            "paper_printed" | "paper-printed" => Ok(PhiMode::PaperPrinted),
            _ => Err(Error::invalid(format!("unknown phi mode `{s}` (expected derived or paper_printed)"))),
        }
    }
}

impl std::fmt::Display for PhiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PhiMode::Derived => "derived",
            PhiMode::PaperPrinted => "paper_printed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Substitution {
    pub n: u32,
    pub r1: f64,
    pub r0: f64,
    pub mode: PhiMode,
}

impl Substitution {
    pub fn new(n: u32, r1: f64, r0: f64, mode: PhiMode) -> Result<Substitution> {
        if n < 2 {
            return Err(Error::invalid(format!("space dimension must be at least 2, got {n}")));
        }
        if !(r1 > 0.0 && r1 < r0 && r0.is_finite()) {
            return Err(Error::invalid(format!("radii must satisfy 0 < R1 < R0, got R1 = {r1}, R0 = {r0}")));
        }
        Ok(Substitution { n, r1, r0, mode })
    }

    fn gamma_beta(&self) -> (f64, f64) {
        let p = (self.n - 2) as f64;
        (self.r0.powf(-p), self.r1.powf(-p))
    }

    pub fn r(&self, t: f64) -> f64 {
        if self.n == 2 {
            // exact endpoints
            if t == 0.0 {
                return self.r0;
            }
            if t == 1.0 {
                return self.r1;
            }
            self.r0.powf(1.0 - t) * self.r1.powf(t)
        } else {
            if t == 0.0 {
                return self.r0;
            }
            if t == 1.0 {
                return self.r1;
            }
            let (g, b) = self.gamma_beta();
            let p = (self.n - 2) as f64;
            (g + (b - g) * t).powf(-1.0 / p)
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        if self.n == 2 {
            let l = (self.r0 / self.r1).ln();
            match self.mode {
                PhiMode::Derived => (l * self.r(t)).powi(2),
                PhiMode::PaperPrinted => (self.r0 * (1.0 - t) * l).powi(2),
            }
        } else {
            let (g, b) = self.gamma_beta();
            let p = (self.n - 2) as f64;
            ((b - g) / p).powi(2) * (g + (b - g) * t).powf(-2.0 * (self.n - 1) as f64 / p)
        }
    }

    /// `r(t)` as an expression in `t`.
    pub fn r_expression(&self) -> Expression {
        let src = if self.n == 2 {
            format!("({:?})^(1-t)*({:?})^t", self.r0, self.r1)
        } else {
            let (g, b) = self.gamma_beta();
            format!("(({:?})+({:?})*t)^(-1/({}))", g, b - g, self.n - 2)
        };
        parse_t(&src)
    }

    /// `phi(t)` as an expression in `t`.
    pub fn phi_expression(&self) -> Expression {
        let src = if self.n == 2 {
            let l = (self.r0 / self.r1).ln();
            match self.mode {
                PhiMode::Derived => format!("({:?})*({})^2", l * l, self.r_expression()),
                PhiMode::PaperPrinted => {
                    if l == 1.0 {
                        format!("(({:?})*(1-t))^2", self.r0)
                    } else {
                        format!("(({:?})*(1-t)*({:?}))^2", self.r0, l)
                    }
                }
            }
        } else {
            let (g, b) = self.gamma_beta();
            let p = (self.n - 2) as f64;
            format!(
                "({:?})*(({:?})+({:?})*t)^(-({}))",
                ((b - g) / p).powi(2),
                g,
                b - g,
                Expression::constant(2.0 * (self.n - 1) as f64 / p)
            )
        };
        parse_t(&src)
    }

    /// Solves `r(t) = radius` by bisection; `r` is strictly decreasing.
    pub fn inverse(&self, radius: f64) -> Result<f64> {
        if !(radius >= self.r1 && radius <= self.r0) {
            return Err(Error::invalid(format!("radius {radius} lies outside [R1, R0] = [{}, {}]", self.r1, self.r0)));
        }
        if radius == self.r0 {
            return Ok(0.0);
        }
        if radius == self.r1 {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.r(mid) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn parse_t(src: &str) -> Expression {
    match Expression::parse_with_vars(src, &[Var::T]) {
        Ok(e) => e,
        Err(e) => unreachable!("generated expression `{src}` failed to parse: {e}"),
    }
}

/// Annulus data: dimension, radii, right-hand side factors `h_i(r)` and the
/// nonlocal boundary parameters.
#[derive(Debug, Clone)]
pub struct AnnulusSpec {
    pub n: u32,
    pub r1: f64,
    pub r0: f64,
    pub h: [Expression; 2],
    pub alpha: [f64; 2],
    pub r_eta: f64,
    pub r_xi: f64,
}

impl AnnulusSpec {
    pub fn validate(&self) -> Result<()> {
        Substitution::new(self.n, self.r1, self.r0, PhiMode::Derived)?;
        for (name, x) in [("R_eta", self.r_eta), ("R_xi", self.r_xi)] {
            if !(x > self.r1 && x < self.r0) {
                return Err(Error::invalid(format!(
                    "{name} = {x} must lie strictly between R1 = {} and R0 = {}",
                    self.r1, self.r0
                )));
            }
        }
        for (i, h) in self.h.iter().enumerate() {
            if let Some(v) = h.free_vars().into_iter().find(|v| *v != Var::R) {
                return Err(Error::invalid(format!("h{} may only depend on r, found `{}`", i + 1, v.name())));
            }
        }
        Ok(())
    }
}

/// Reduced data on `[0,1]`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub g: [WeightFunction; 2],
    pub eta: f64,
    pub xi: f64,
    pub alpha: [f64; 2],
    pub substitution: Substitution,
}

pub fn build_weights(a: &AnnulusSpec, mode: PhiMode) -> Result<ReducedSystem> {
    a.validate()?;
    let sub = Substitution::new(a.n, a.r1, a.r0, mode)?;
    let phi = sub.phi_expression();
    let r = sub.r_expression();
    let make = |h: &Expression| -> Result<WeightFunction> {
        if h.is_literal_zero() {
            return WeightFunction::constant(0.0);
        }
        let hr = h.substitute(Var::R, &r);
        let src = if is_literal_one(h) { format!("{phi}") } else { format!("({phi})*({hr})") };
        WeightFunction::parse(&src)
    };
    let g = [make(&a.h[0])?, make(&a.h[1])?];
    Ok(ReducedSystem { g, eta: sub.inverse(a.r_eta)?, xi: sub.inverse(a.r_xi)?, alpha: a.alpha, substitution: sub })
}

fn is_literal_one(e: &Expression) -> bool {
    matches!(e.ast().kind, crate::expr::ExprKind::Num(x) if x == 1.0)
}

/// Samples a function given at `nodes` on `[0,1]` on an increasing radius
/// grid from `R1` to `R0`.
pub fn pull_back(nodes: &[f64], values: &[f64], sub: &Substitution, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::invalid("pull_back needs at least two samples"));
    }
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::invalid("pull_back needs matching, nonempty node and value lists"));
    }
    (0..samples)
        .map(|k| {
            let radius =
                if k + 1 == samples { sub.r0 } else { sub.r1 + (sub.r0 - sub.r1) * k as f64 / (samples - 1) as f64 };
            let t = sub.inverse(radius)?;
            Ok((radius, interp::eval(nodes, values, t)))
        })
        .collect()
}
