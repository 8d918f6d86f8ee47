//! Sampled verification of the fixed point index conditions for the system
//!
//! ```text
//! u(t) = int_0^1 k1(t,s) g1(s) f1(s, u(s), v(s)) ds
//! v(t) = int_0^1 k2(t,s) g2(s) f2(s, u(s), v(s)) ds
//! ```
//!
//! and the resulting existence, multiplicity or non-existence verdict.

pub mod conclude;
pub mod conditions;
pub mod report;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, Var};
use crate::kernel::{KernelSpec, KernelVariant};
use crate::weight::WeightFunction;

pub use conclude::{conclude, Case, Conclusion, SetKind, SetRef, Shell};
pub use conditions::{
    check_eigen_condition, check_i0, check_i0_star, check_i0_underline, check_i1, check_nonexistence, ComponentRecord,
    ConditionId, ConditionRecord, EigenInputs, EigenWhich, Nonexistence, NonexistenceRecord,
};
pub use report::{certify, CertificateReport, ConstantsRecord, EigenOptions};
pub use scan::{box_extremum, BoxExtremum, BoxSpec};

/// The two kernels, weights and nonlinearities of a system.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub kernels: [KernelSpec; 2],
    pub g: [WeightFunction; 2],
    pub f: [Expression; 2],
}

impl ProblemSpec {
    pub fn new(
        name: Option<String>,
        kernels: [KernelSpec; 2],
        g: [WeightFunction; 2],
        f: [Expression; 2],
    ) -> Result<Self> {
        for (i, fi) in f.iter().enumerate() {
            if let Some(v) = fi.free_vars().into_iter().find(|v| *v == Var::R) {
                return Err(Error::invalid(format!("f{} may only depend on t, u, v, found `{}`", i + 1, v.name())));
            }
        }
        Ok(ProblemSpec { name, kernels, g, f })
    }

    /// The system with `k1{alpha=-1, eta=1/2}`, `k2{alpha=1/4, xi=1/4}`,
    /// `g = e^2 (1-t)^2`, intervals `[0, 1/4]`,
    /// `f1 = (|u|^3 + |v|^3 + 1)/4` and `f2 = (sqrt|u| + v^2)/3`.
    pub fn worked_example() -> ProblemSpec {
        let build = || -> Result<ProblemSpec> {
            let k1 = KernelSpec::with_interval(KernelVariant::ThreePoint { alpha: -1.0, eta: 0.5 }, 0.0, 0.25)?;
            let k2 = KernelSpec::with_interval(KernelVariant::Derivative { alpha: 0.25, xi: 0.25 }, 0.0, 0.25)?;
            let g = WeightFunction::parse("e^2*(1-t)^2")?;
            ProblemSpec::new(
                Some("worked example".into()),
                [k1, k2],
                [g.clone(), g],
                [Expression::parse("(abs(u)^3 + abs(v)^3 + 1)/4")?, Expression::parse("(sqrt(abs(u)) + v^2)/3")?],
            )
        };
        match build() {
            Ok(p) => p,
            Err(e) => unreachable!("built-in example is valid: {e}"),
        }
    }

    pub fn c(&self) -> [f64; 2] {
        [self.kernels[0].c, self.kernels[1].c]
    }

    pub fn intervals(&self) -> [[f64; 2]; 2] {
        [[self.kernels[0].a, self.kernels[0].b], [self.kernels[1].a, self.kernels[1].b]]
    }

    pub fn intervals_equal(&self) -> bool {
        let [i1, i2] = self.intervals();
        i1 == i2
    }

    /// `f_i(t,u,v)` for `i` in `{0, 1}`, failing on domain errors and on
    /// negative values.
    pub fn f_value(&self, i: usize, t: f64, u: f64, v: f64) -> Result<f64> {
        let value =
            self.f[i].eval_tuv(t, u, v).map_err(|source| Error::EvalAt { component: i + 1, t, u, v, source })?;
        if value < 0.0 {
            return Err(Error::Negative { component: i + 1, t, u, v, value });
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Rho,
    R,
    S,
    Sigma,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Rho, Level::R, Level::S, Level::Sigma];

    pub fn name(self) -> &'static str {
        match self {
            Level::Rho => "rho",
            Level::R => "r",
            Level::S => "s",
            Level::Sigma => "sigma",
        }
    }
}

/// Radii `rho < r < s < sigma` (per component), each level optional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RadiiLadder {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 2]>,
}

impl RadiiLadder {
    pub fn worked_example() -> RadiiLadder {
        RadiiLadder { rho: Some([1.0 / 6.0, 1.0 / 3.0]), r: Some([1.0, 1.0]), s: Some([3.0, 5.0]), sigma: None }
    }

    pub fn get(&self, level: Level) -> Option<[f64; 2]> {
        match level {
            Level::Rho => self.rho,
            Level::R => self.r,
            Level::S => self.s,
            Level::Sigma => self.sigma,
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = (Level, [f64; 2])> + '_ {
        Level::ALL.into_iter().filter_map(|l| self.get(l).map(|r| (l, r)))
    }

    pub fn validate(&self) -> Result<()> {
        for (l, r) in self.levels() {
            if !(r[0] > 0.0 && r[1] > 0.0 && r[0].is_finite() && r[1].is_finite()) {
                return Err(Error::invalid(format!("ladder level {} must be positive, got {r:?}", l.name())));
            }
        }
        Ok(())
    }

    /// Largest radius on the ladder, or `None` for an empty ladder.
    pub fn max_radius(&self) -> Option<f64> {
        self.levels().flat_map(|(_, r)| r).reduce(f64::max)
    }
}
