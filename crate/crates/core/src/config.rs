//! Problem files: JSON documents with expressions as strings.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "worked example",
//!   "kernels": [
//!     {"type": "three_point", "alpha": -1, "eta": 0.5},
//!     {"type": "derivative", "alpha": 0.25, "xi": 0.25}
//!   ],
//!   "weights": "e^2*(1-t)^2",
//!   "nonlinearities": ["(abs(u)^3 + abs(v)^3 + 1)/4", "(sqrt(abs(u)) + v^2)/3"],
//!   "intervals": [[0, 0.25], [0, 0.25]],
//!   "ladder": {"rho": ["1/6", "1/3"], "r": [1, 1], "s": [3, 5]}
//! }
//! ```
//!
//! Numbers may also be given as constant expressions such as `"1/6"` or
//! `"e^(3/4)"`. `weights` is one expression for both components, a pair, or
//! `"radial"` (taken from the `annulus` section). `intervals` is a pair of
//! `[a, b]` or `"optimal"` entries, or `"optimal"` for both (the default).
//! With an `annulus` section the kernels may be omitted; they are then built
//! from its boundary parameters.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bounds::{optimal_interval, optimal_interval_numeric};
use crate::certify::{EigenOptions, ProblemSpec, RadiiLadder};
use crate::error::{Error, Result};
use crate::expr::{eval_constant, Expression, Var};
use crate::kernel::{KernelSpec, KernelVariant};
use crate::radial::{build_weights, AnnulusSpec, ReducedSystem};
use crate::settings::Settings;
use crate::weight::WeightFunction;

pub const FORMAT_VERSION: u32 = 1;

const KEYS: [&str; 10] =
    ["version", "name", "kernels", "weights", "nonlinearities", "intervals", "ladder", "eigen", "settings", "annulus"];

/// A number or a constant expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Value(f64),
    Expr(String),
}

impl Num {
    pub fn value(&self) -> Result<f64> {
        match self {
            Num::Value(x) => Ok(*x),
            Num::Expr(s) => eval_constant(s),
        }
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Num {
        Num::Value(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelEntry {
    ThreePoint { alpha: Num, eta: Num },
    Derivative { alpha: Num, xi: Num },
}

impl KernelEntry {
    fn variant(&self) -> Result<KernelVariant> {
        Ok(match self {
            KernelEntry::ThreePoint { alpha, eta } => {
                KernelVariant::ThreePoint { alpha: alpha.value()?, eta: eta.value()? }
            }
            KernelEntry::Derivative { alpha, xi } => {
                KernelVariant::Derivative { alpha: alpha.value()?, xi: xi.value()? }
            }
        })
    }

    fn from_variant(v: &KernelVariant) -> KernelEntry {
        match *v {
            KernelVariant::ThreePoint { alpha, eta } => {
                KernelEntry::ThreePoint { alpha: alpha.into(), eta: eta.into() }
            }
            KernelVariant::Derivative { alpha, xi } => KernelEntry::Derivative { alpha: alpha.into(), xi: xi.into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsEntry {
    Both(String),
    Each([String; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntervalEntry {
    Explicit([Num; 2]),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntervalsEntry {
    Each([IntervalEntry; 2]),
    Keyword(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<[Num; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[Num; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<[Num; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[Num; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<Num>,
    #[serde(default, rename = "R1", skip_serializing_if = "Option::is_none")]
    pub r1: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusEntry {
    pub n: u32,
    #[serde(rename = "R1")]
    pub r1: Num,
    #[serde(rename = "R0")]
    pub r0: Num,
    pub h: [String; 2],
    pub alpha: [Num; 2],
    #[serde(rename = "R_eta")]
    pub r_eta: Num,
    #[serde(rename = "R_xi")]
    pub r_xi: Num,
}

/// The document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<[KernelEntry; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsEntry>,
    pub nonlinearities: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<IntervalsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Settings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annulus: Option<AnnulusEntry>,
}

/// A validated problem with everything resolved.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub file: ProblemFile,
    pub problem: ProblemSpec,
    pub ladder: RadiiLadder,
    pub eigen: Option<EigenOptions>,
    pub settings: Settings,
    pub annulus: Option<AnnulusSpec>,
    pub reduced: Option<ReducedSystem>,
}

impl LoadedProblem {
    /// The same problem with kernels, weights and intervals written out and
    /// the annulus section dropped.
    pub fn to_explicit_file(&self) -> ProblemFile {
        let p = &self.problem;
        let w = [p.g[0].expression().to_string(), p.g[1].expression().to_string()];
        let weights = if w[0] == w[1] { WeightsEntry::Both(w[0].clone()) } else { WeightsEntry::Each(w) };
        let iv = |k: &KernelSpec| IntervalEntry::Explicit([k.a.into(), k.b.into()]);
        let num2 = |r: Option<[f64; 2]>| r.map(|[x, y]| [Num::Value(x), Num::Value(y)]);
        let ladder = LadderEntry {
            rho: num2(self.ladder.rho),
            r: num2(self.ladder.r),
            s: num2(self.ladder.s),
            sigma: num2(self.ladder.sigma),
        };
        ProblemFile {
            version: FORMAT_VERSION,
            name: p.name.clone(),
            kernels: Some([
                KernelEntry::from_variant(&p.kernels[0].variant),
                KernelEntry::from_variant(&p.kernels[1].variant),
            ]),
            weights: Some(weights),
            nonlinearities: [p.f[0].to_string(), p.f[1].to_string()],
            intervals: Some(IntervalsEntry::Each([iv(&p.kernels[0]), iv(&p.kernels[1])])),
            ladder: self.ladder.levels().next().map(|_| ladder),
            eigen: self.eigen.map(|e| EigenEntry {
                rho0: e.rho0.map(Num::Value),
                r1: e.r1.map(Num::Value),
                eps: e.eps.map(Num::Value),
            }),
            settings: Some(self.settings.clone()),
            annulus: None,
        }
    }
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    resolve(read_problem_file(path)?)
}

pub fn read_problem_file(path: &Path) -> Result<ProblemFile> {
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_problem_file(&text)
}

/// Validates and resolves a problem document, reporting every violation found.
pub fn parse_problem(text: &str) -> Result<LoadedProblem> {
    resolve(parse_problem_file(text)?)
}

/// Schema check of a problem document without resolving it.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(obj) = value else {
        return Err(Error::Schema(vec!["top level must be a JSON object".into()]));
    };
    let mut errs = Vec::new();
    for key in obj.keys() {
        if !KEYS.contains(&key.as_str()) {
            errs.push(format!("unknown key `{key}` (expected one of {})", KEYS.join(", ")));
        }
    }
    let version: Option<u32> = field(&obj, "version", &mut errs, true);
    if let Some(v) = version {
        if v != FORMAT_VERSION {
            errs.push(format!("version: unsupported version {v}, expected {FORMAT_VERSION}"));
        }
    }
    let name: Option<String> = field(&obj, "name", &mut errs, false);
    let kernels: Option<[KernelEntry; 2]> = field(&obj, "kernels", &mut errs, false);
    let weights: Option<WeightsEntry> = field(&obj, "weights", &mut errs, false);
    let nonlinearities: Option<[String; 2]> = field(&obj, "nonlinearities", &mut errs, true);
    let intervals: Option<IntervalsEntry> = field(&obj, "intervals", &mut errs, false);
    let ladder: Option<LadderEntry> = field(&obj, "ladder", &mut errs, false);
    let eigen: Option<EigenEntry> = field(&obj, "eigen", &mut errs, false);
    let settings: Option<Settings> = field(&obj, "settings", &mut errs, false);
    let annulus: Option<AnnulusEntry> = field(&obj, "annulus", &mut errs, false);
    if !errs.is_empty() {
        return Err(Error::Schema(errs));
    }
    let file = ProblemFile {
        version: version.unwrap_or(FORMAT_VERSION),
        name,
        kernels,
        weights,
        nonlinearities: nonlinearities.unwrap_or_default(),
        intervals,
        ladder,
        eigen,
        settings,
        annulus,
    };
    Ok(file)
}

fn field<T: DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &str,
    errs: &mut Vec<String>,
    required: bool,
) -> Option<T> {
    match obj.get(key) {
        None if required => {
            errs.push(format!("missing required key `{key}`"));
            None
        }
        None => None,
        Some(v) => match serde_json::from_value(v.clone()) {
            Ok(x) => Some(x),
            Err(e) => {
                errs.push(format!("{key}: {e}{}", hint(key)));
                None
            }
        },
    }
}

fn hint(key: &str) -> &'static str {
    match key {
        "weights" => " (expected an expression in t, a pair of them, or \"radial\")",
        "intervals" => " (expected \"optimal\" or a pair of [a, b] / \"optimal\" entries)",
        "kernels" => " (expected two objects with type three_point {alpha, eta} or derivative {alpha, xi})",
        _ => "",
    }
}

/// Records an error and returns `None`, so that validation continues.
fn collect<T>(r: Result<T>, what: &str, errs: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(x) => Some(x),
        Err(e) => {
            errs.push(format!("{what}: {e}"));
            None
        }
    }
}

fn num2(x: &[Num; 2], what: &str, errs: &mut Vec<String>) -> Option<[f64; 2]> {
    let a = collect(x[0].value(), what, errs)?;
    let b = collect(x[1].value(), what, errs)?;
    Some([a, b])
}

/// Resolves and validates a parsed document.
pub fn resolve(file: ProblemFile) -> Result<LoadedProblem> {
    let mut errs = Vec::new();
    let settings = file.settings.clone().unwrap_or_default();
    for e in settings.validate() {
        errs.push(format!("settings: {e}"));
    }

    let annulus = file.annulus.as_ref().and_then(|a| {
        let r1 = collect(a.r1.value(), "annulus.R1", &mut errs)?;
        let r0 = collect(a.r0.value(), "annulus.R0", &mut errs)?;
        let alpha = num2(&a.alpha, "annulus.alpha", &mut errs)?;
        let r_eta = collect(a.r_eta.value(), "annulus.R_eta", &mut errs)?;
        let r_xi = collect(a.r_xi.value(), "annulus.R_xi", &mut errs)?;
        let h0 =
            collect(Expression::parse_with_vars(&a.h[0], &[Var::R]).map_err(Error::from), "annulus.h[0]", &mut errs)?;
        let h1 =
            collect(Expression::parse_with_vars(&a.h[1], &[Var::R]).map_err(Error::from), "annulus.h[1]", &mut errs)?;
        let spec = AnnulusSpec { n: a.n, r1, r0, h: [h0, h1], alpha, r_eta, r_xi };
        collect(spec.validate(), "annulus", &mut errs)?;
        Some(spec)
    });
    let reduced = annulus.as_ref().and_then(|a| collect(build_weights(a, settings.phi_mode), "annulus", &mut errs));

    let variants: Option<[KernelVariant; 2]> = match (&file.kernels, &reduced) {
        (Some(k), _) => {
            let v0 = collect(k[0].variant(), "kernels[0]", &mut errs);
            let v1 = collect(k[1].variant(), "kernels[1]", &mut errs);
            v0.zip(v1).map(|(a, b)| [a, b])
        }
        (None, Some(red)) => Some([
            KernelVariant::ThreePoint { alpha: red.alpha[0], eta: red.eta },
            KernelVariant::Derivative { alpha: red.alpha[1], xi: red.xi },
        ]),
        (None, None) => {
            if file.annulus.is_none() {
                errs.push("missing required key `kernels` (or an `annulus` section to derive them from)".into());
            }
            None
        }
    };

    let weight_src: [Option<String>; 2] = match &file.weights {
        None if reduced.is_some() => [Some("radial".into()), Some("radial".into())],
        None => [Some("1".into()), Some("1".into())],
        Some(WeightsEntry::Both(s)) => [Some(s.clone()), Some(s.clone())],
        Some(WeightsEntry::Each(w)) => [Some(w[0].clone()), Some(w[1].clone())],
    };
    let mut g: [Option<WeightFunction>; 2] = [None, None];
    for i in 0..2 {
        let Some(src) = &weight_src[i] else { continue };
        let what = format!("weights[{i}]");
        g[i] = if src.trim() == "radial" {
            match &reduced {
                Some(red) => Some(red.g[i].clone()),
                None => {
                    if file.annulus.is_none() {
                        errs.push(format!("{what}: \"radial\" needs an `annulus` section"));
                    }
                    None
                }
            }
        } else {
            collect(WeightFunction::parse(src), &what, &mut errs)
        };
    }

    let mut f: [Option<Expression>; 2] = [None, None];
    for i in 0..2 {
        let parsed =
            Expression::parse_with_vars(&file.nonlinearities[i], &[Var::T, Var::U, Var::V]).map_err(Error::from);
        f[i] = collect(parsed, &format!("nonlinearities[{i}]"), &mut errs);
    }

    let mut kernels: [Option<KernelSpec>; 2] = [None, None];
    if let Some(vs) = variants {
        let entries: [IntervalEntry; 2] = match &file.intervals {
            None => [IntervalEntry::Keyword("optimal".into()), IntervalEntry::Keyword("optimal".into())],
            Some(IntervalsEntry::Keyword(k)) => [IntervalEntry::Keyword(k.clone()), IntervalEntry::Keyword(k.clone())],
            Some(IntervalsEntry::Each(e)) => e.clone(),
        };
        for i in 0..2 {
            let what = format!("kernels[{i}]");
            kernels[i] = match &entries[i] {
                IntervalEntry::Explicit(ab) => num2(ab, &format!("intervals[{i}]"), &mut errs)
                    .and_then(|[a, b]| collect(KernelSpec::with_interval(vs[i], a, b), &what, &mut errs)),
                IntervalEntry::Keyword(k) if k == "optimal" => {
                    let base = collect(KernelSpec::new(vs[i]), &what, &mut errs);
                    match (base, &g[i]) {
                        (Some(k), Some(gi)) if !gi.is_unit() => {
                            let opt = collect(
                                optimal_interval_numeric(&k, gi, false, &settings.scan()),
                                &format!("intervals[{i}]"),
                                &mut errs,
                            );
                            opt.and_then(|o| collect(KernelSpec::with_interval(vs[i], o.a, o.b), &what, &mut errs))
                        }
                        (Some(k), _) => {
                            let o = optimal_interval(&k);
                            collect(KernelSpec::with_interval(vs[i], o.a, o.b), &what, &mut errs)
                        }
                        (None, _) => None,
                    }
                }
                IntervalEntry::Keyword(k) => {
                    errs.push(format!("intervals[{i}]: unknown keyword \"{k}\" (expected \"optimal\")"));
                    None
                }
            };
        }
    }

    let ladder = file.ladder.as_ref().map(|l| {
        let mut get =
            |x: &Option<[Num; 2]>, name: &str| x.as_ref().and_then(|x| num2(x, &format!("ladder.{name}"), &mut errs));
        RadiiLadder { rho: get(&l.rho, "rho"), r: get(&l.r, "r"), s: get(&l.s, "s"), sigma: get(&l.sigma, "sigma") }
    });
    let ladder = ladder.unwrap_or_default();
    collect(ladder.validate(), "ladder", &mut errs);

    let eigen = file.eigen.as_ref().map(|e| {
        let mut get = |x: &Option<Num>, name: &str| {
            x.as_ref().and_then(|x| collect(x.value(), &format!("eigen.{name}"), &mut errs))
        };
        EigenOptions { rho0: get(&e.rho0, "rho0"), r1: get(&e.r1, "R1"), eps: get(&e.eps, "eps") }
    });

    if !errs.is_empty() {
        return Err(Error::Schema(errs));
    }
    let (Some(k0), Some(k1), Some(g0), Some(g1), Some(f0), Some(f1)) =
        (kernels[0], kernels[1], g[0].clone(), g[1].clone(), f[0].clone(), f[1].clone())
    else {
        return Err(Error::Internal("problem validation left a component unresolved".into()));
    };
    let problem = ProblemSpec::new(file.name.clone(), [k0, k1], [g0, g1], [f0, f1])?;
    Ok(LoadedProblem { file, problem, ladder, eigen, settings, annulus, reduced })
}
