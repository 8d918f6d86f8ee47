use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Expression, Var};

const VALIDATION_SAMPLES: usize = 1024;

/// A nonnegative weight `g(t)` on `[0,1]`, given as an expression in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    expr: Expression,
}

impl WeightFunction {
    /// Wraps an expression after checking that it only uses `t` and is finite
    /// and nonnegative on a uniform sample of `[0,1]`.
    pub fn new(expr: Expression) -> Result<WeightFunction> {
        if let Some(v) = expr.free_vars().into_iter().find(|v| *v != Var::T) {
            return Err(Error::invalid(format!("weight `{expr}` may only depend on t, found `{}`", v.name())));
        }
        for k in 0..=VALIDATION_SAMPLES {
            let t = k as f64 / VALIDATION_SAMPLES as f64;
            let g = expr.eval_t(t)?;
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::invalid(format!(
                    "weight `{expr}` must be finite and nonnegative on [0,1], g({t}) = {g}"
                )));
            }
        }
        Ok(WeightFunction { expr })
    }

    pub fn parse(src: &str) -> Result<WeightFunction> {
        WeightFunction::new(Expression::parse_with_vars(src, &[Var::T])?)
    }

    pub fn constant(c: f64) -> Result<WeightFunction> {
        WeightFunction::new(Expression::constant(c))
    }

    pub fn one() -> WeightFunction {
        WeightFunction { expr: Expression::constant(1.0) }
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    /// `true` when the weight is the literal constant `1`.
    pub fn is_unit(&self) -> bool {
        use crate::expr::ExprKind;
        matches!(self.expr.ast().kind, ExprKind::Num(x) if x == 1.0)
    }

    /// Evaluates `g(t)`; a domain error between validation samples yields NaN,
    /// which the quadrature layer reports.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.expr.eval_t(t).unwrap_or(f64::NAN)
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_example_weight() {
        let g = WeightFunction::parse("e^2*(1-t)^2").unwrap();
        assert!((g.eval(0.0) - std::f64::consts::E.powi(2)).abs() < 1e-14);
        assert_eq!(g.eval(1.0), 0.0);
    }

    #[test]
    fn rejects_negative_or_foreign_variables() {
        assert!(WeightFunction::parse("t - 0.5").is_err());
        assert!(WeightFunction::parse("u").is_err());
        assert!(WeightFunction::parse("sqrt(t - 0.5)").is_err());
    }

    #[test]
    fn unit_detection() {
        assert!(WeightFunction::parse("1").unwrap().is_unit());
        assert!(WeightFunction::one().is_unit());
        assert!(!WeightFunction::parse("1 + 0*t").unwrap().is_unit());
    }
}
