//! The individual index conditions, each evaluated by box scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scan::{box_extremum, geometric_axis, scan_axes, uniform_axis, BoxSpec};
use super::{Level, ProblemSpec};
use crate::error::{Error, Result};
use crate::quadrature::Mode;
use crate::spectral::{resolvent_bound_r0, NystromMatrix, ResolventInput};

/// Smallest `|u|` sampled by ratio scans, relative to the range.
const RATIO_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// `sup f_i / rho_i < m_i` on `[0,1] x [-rho1,rho1] x [-rho2,rho2]`.
    I1,
    /// `inf f_i / rho_i > M_i` on the shell boxes.
    I0,
    /// As `I0` with `u_i` from `0`; one component suffices.
    I0Star,
    /// As `I0` with the other variable restricted to `>= 0`.
    I0Underline,
    I0UnderlineStar,
    /// `f_i >= (mu(L_i+) + eps) u_i` near zero; one component suffices.
    I0Zero,
    /// `f_i >= (mu(L_i+) + eps) u_i` for `u_i >= c_i R1`.
    I0Infinity,
    /// `f_i <= (mu(L_i) - eps) |u_i|` near zero.
    I1Zero,
    /// `f_i <= (mu(L_i) - eps) |u_i|` for `|u|, |v| >= R1`.
    I1Infinity,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::I1 => "I1",
            ConditionId::I0 => "I0",
            ConditionId::I0Star => "I0*",
            ConditionId::I0Underline => "I0_",
            ConditionId::I0UnderlineStar => "I0_*",
            ConditionId::I0Zero => "I0(0+)",
            ConditionId::I0Infinity => "I0(inf)",
            ConditionId::I1Zero => "I1(0+)",
            ConditionId::I1Infinity => "I1(inf)",
        }
    }

    /// Conditions that give index 0 on the corresponding set.
    pub fn is_index_zero(self) -> bool {
        !matches!(self, ConditionId::I1 | ConditionId::I1Zero | ConditionId::I1Infinity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub component: usize,
    pub region: BoxSpec,
    #[serde(with = "crate::float_json")]
    pub computed: f64,
    #[serde(with = "crate::float_json")]
    pub threshold: f64,
    #[serde(with = "crate::float_json")]
    pub margin: f64,
    pub witness: [f64; 3],
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub id: ConditionId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<Level>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<[f64; 2]>,
    #[serde(with = "crate::float_json")]
    pub computed: f64,
    #[serde(with = "crate::float_json")]
    pub threshold: f64,
    #[serde(with = "crate::float_json")]
    pub margin: f64,
    pub density: usize,
    pub verdict: bool,
    /// The component that carries an either-or condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolvent_r0: Option<f64>,
    pub components: Vec<ComponentRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Whether one or both components must pass.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantifier {
    All,
    Any,
}

fn assemble(
    id: ConditionId,
    radii: Option<[f64; 2]>,
    density: usize,
    components: Vec<ComponentRecord>,
    q: Quantifier,
) -> ConditionRecord {
    let pick = match q {
        Quantifier::All => components.iter().min_by(|a, b| a.margin.total_cmp(&b.margin)),
        Quantifier::Any => {
            components.iter().max_by(|a, b| a.margin.total_cmp(&b.margin).then(b.component.cmp(&a.component)))
        }
    };
    let pick = pick.cloned().unwrap_or(ComponentRecord {
        component: 0,
        region: BoxSpec::new([0.0; 2], [0.0; 2], [0.0; 2]),
        computed: f64::NAN,
        threshold: f64::NAN,
        margin: f64::NAN,
        witness: [0.0; 3],
        verdict: false,
    });
    let verdict = match q {
        Quantifier::All => components.iter().all(|c| c.verdict),
        Quantifier::Any => components.iter().any(|c| c.verdict),
    };
    ConditionRecord {
        id,
        level: None,
        radii,
        computed: pick.computed,
        threshold: pick.threshold,
        margin: pick.margin,
        density,
        verdict,
        via: (q == Quantifier::Any && verdict).then_some(pick.component),
        eps: None,
        resolvent_r0: None,
        components,
        notes: Vec::new(),
    }
}

fn check_radii(radii: [f64; 2]) -> Result<()> {
    if !(radii[0] > 0.0 && radii[1] > 0.0) {
        return Err(Error::invalid(format!("radii must be positive, got {radii:?}")));
    }
    Ok(())
}

/// `sup f_i / rho_i` over `[0,1] x [-rho1,rho1] x [-rho2,rho2]` against `m_i`.
pub fn check_i1(
    p: &ProblemSpec,
    radii: [f64; 2],
    m: [f64; 2],
    density: usize,
    strictness: f64,
) -> Result<ConditionRecord> {
    check_radii(radii)?;
    let region = BoxSpec::new([0.0, 1.0], [-radii[0], radii[0]], [-radii[1], radii[1]]);
    let mut comps = Vec::with_capacity(2);
    for i in 0..2 {
        let e = box_extremum(&|t, u, v| p.f_value(i, t, u, v), &region, Mode::Sup, density)?;
        let computed = e.value / radii[i];
        let margin = m[i] - computed;
        comps.push(ComponentRecord {
            component: i + 1,
            region,
            computed,
            threshold: m[i],
            margin,
            witness: e.point,
            verdict: margin >= strictness,
        });
    }
    Ok(assemble(ConditionId::I1, Some(radii), density, comps, Quantifier::All))
}

fn lower_bound_component(
    p: &ProblemSpec,
    i: usize,
    region: BoxSpec,
    radius: f64,
    big_m: f64,
    density: usize,
    strictness: f64,
) -> Result<ComponentRecord> {
    let e = box_extremum(&|t, u, v| p.f_value(i, t, u, v), &region, Mode::Inf, density)?;
    let computed = e.value / radius;
    let margin = computed - big_m;
    Ok(ComponentRecord {
        component: i + 1,
        region,
        computed,
        threshold: big_m,
        margin,
        witness: e.point,
        verdict: margin >= strictness,
    })
}

/// `inf f_1 / rho_1` over `[a1,b1] x [rho1, rho1/c1] x [-rho2/c2, rho2/c2]`
/// (and symmetrically for `f_2`) against `M_i`; both must pass.
pub fn check_i0(
    p: &ProblemSpec,
    radii: [f64; 2],
    big_m: [f64; 2],
    density: usize,
    strictness: f64,
) -> Result<ConditionRecord> {
    check_radii(radii)?;
    let [c1, c2] = p.c();
    let [i1, i2] = p.intervals();
    let (r1, r2) = (radii[0], radii[1]);
    let regions =
        [BoxSpec::new(i1, [r1, r1 / c1], [-r2 / c2, r2 / c2]), BoxSpec::new(i2, [-r1 / c1, r1 / c1], [r2, r2 / c2])];
    let comps = (0..2)
        .map(|i| lower_bound_component(p, i, regions[i], radii[i], big_m[i], density, strictness))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(ConditionId::I0, Some(radii), density, comps, Quantifier::All))
}

/// As [`check_i0`] with `u_1` (resp. `u_2`) ranging from `0`; one component
/// suffices.
pub fn check_i0_star(
    p: &ProblemSpec,
    radii: [f64; 2],
    big_m: [f64; 2],
    density: usize,
    strictness: f64,
) -> Result<ConditionRecord> {
    check_radii(radii)?;
    let [c1, c2] = p.c();
    let [i1, i2] = p.intervals();
    let (r1, r2) = (radii[0], radii[1]);
    let regions =
        [BoxSpec::new(i1, [0.0, r1 / c1], [-r2 / c2, r2 / c2]), BoxSpec::new(i2, [-r1 / c1, r1 / c1], [0.0, r2 / c2])];
    let comps = (0..2)
        .map(|i| lower_bound_component(p, i, regions[i], radii[i], big_m[i], density, strictness))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(ConditionId::I0Star, Some(radii), density, comps, Quantifier::Any))
}

/// The variants for equal intervals, where the other variable is only
/// sampled on `[0, rho_j/c_j]`. Without `star` both components must pass
/// (first variable from `rho_i`); with `star` one component suffices and
/// both variables start at `0`.
pub fn check_i0_underline(
    p: &ProblemSpec,
    radii: [f64; 2],
    big_m: [f64; 2],
    star: bool,
    density: usize,
    strictness: f64,
) -> Result<ConditionRecord> {
    check_radii(radii)?;
    let [i1, i2] = p.intervals();
    if i1 != i2 {
        return Err(Error::IntervalsDiffer(i1[0], i1[1], i2[0], i2[1]));
    }
    let [c1, c2] = p.c();
    let (r1, r2) = (radii[0], radii[1]);
    let regions = if star {
        [BoxSpec::new(i1, [0.0, r1 / c1], [0.0, r2 / c2]), BoxSpec::new(i1, [0.0, r1 / c1], [0.0, r2 / c2])]
    } else {
        [BoxSpec::new(i1, [r1, r1 / c1], [0.0, r2 / c2]), BoxSpec::new(i1, [0.0, r1 / c1], [r2, r2 / c2])]
    };
    let comps = (0..2)
        .map(|i| lower_bound_component(p, i, regions[i], radii[i], big_m[i], density, strictness))
        .collect::<Result<Vec<_>>>()?;
    let (id, q) = if star {
        (ConditionId::I0UnderlineStar, Quantifier::Any)
    } else {
        (ConditionId::I0Underline, Quantifier::All)
    };
    Ok(assemble(id, Some(radii), density, comps, q))
}

/// Axis for `|x|` in `[lo, hi]` on both signs, geometric in magnitude.
fn signed_geometric_axis(lo: f64, hi: f64, n: usize, with_zero: bool) -> Vec<f64> {
    let pos = geometric_axis(lo, hi, n / 2);
    let mut axis: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    if with_zero {
        axis.push(0.0);
    }
    axis.extend(pos);
    axis
}

/// Scan of `f_i / |u_i|` with `u_i` taken from `own` and the other variable
/// from `other`.
fn ratio_scan(
    p: &ProblemSpec,
    i: usize,
    t_axis: Vec<f64>,
    own: Vec<f64>,
    other: Vec<f64>,
    mode: Mode,
) -> Result<(f64, [f64; 3])> {
    // the refinement pass may step into gaps such as |u| < R1
    let min_abs = |a: &[f64]| a.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let (own_min, other_min) = (min_abs(&own), min_abs(&other));
    let axes = if i == 0 { [t_axis, own, other] } else { [t_axis, other, own] };
    let obj = |t: f64, u: f64, v: f64| -> Result<f64> {
        let (x, y) = if i == 0 { (u, v) } else { (v, u) };
        if x.abs() < own_min || y.abs() < other_min {
            return Ok(f64::NAN);
        }
        let f = p.f_value(i, t, u, v)?;
        if x == 0.0 {
            // f must vanish where u_i does; excluded otherwise as a violation
            return Ok(if f == 0.0 { f64::NAN } else { f64::INFINITY });
        }
        Ok(f / x.abs())
    };
    let e = scan_axes(&obj, &axes, mode)?;
    Ok((e.value, e.point))
}

fn span(axis: &[f64]) -> [f64; 2] {
    [axis[0], axis[axis.len() - 1]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonexistence {
    /// `f_i < m_i |u_i|` for both components.
    Cond1,
    /// `f_i > M_i u_i` on `[a_i,b_i]`, `u_i > 0`, for both components.
    Cond2,
    /// One component of each kind.
    Mixed,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceRecord {
    pub verdict: Nonexistence,
    pub cap: f64,
    pub density: usize,
    /// Per component: the `f_i < m_i |u_i|` record.
    pub below: Vec<ComponentRecord>,
    /// Per component: the `f_i > M_i u_i` record.
    pub above: Vec<ComponentRecord>,
}

/// Classifies which non-existence condition holds on the box `|u|, |v| <= cap`.
pub fn check_nonexistence(
    p: &ProblemSpec,
    m: [f64; 2],
    big_m: [f64; 2],
    cap: f64,
    density: usize,
    strictness: f64,
) -> Result<NonexistenceRecord> {
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::invalid(format!("sampling cap must be positive, got {cap}")));
    }
    let intervals = p.intervals();
    let mut below = Vec::new();
    let mut above = Vec::new();
    for i in 0..2 {
        let other = uniform_axis(-cap, cap, density);
        let own = signed_geometric_axis(cap * RATIO_FLOOR, cap, density, false);
        let (sup, w) = ratio_scan(p, i, uniform_axis(0.0, 1.0, density), own.clone(), other.clone(), Mode::Sup)?;
        let region = region_for(i, [0.0, 1.0], span(&own), span(&other));
        let margin = m[i] - sup;
        below.push(ComponentRecord {
            component: i + 1,
            region,
            computed: sup,
            threshold: m[i],
            margin,
            witness: w,
            verdict: margin >= strictness,
        });
        let own = geometric_axis(cap * RATIO_FLOOR, cap, density);
        let t_axis = uniform_axis(intervals[i][0], intervals[i][1], density);
        let (inf, w) = ratio_scan(p, i, t_axis, own.clone(), other.clone(), Mode::Inf)?;
        let region = region_for(i, intervals[i], span(&own), span(&other));
        let margin = inf - big_m[i];
        above.push(ComponentRecord {
            component: i + 1,
            region,
            computed: inf,
            threshold: big_m[i],
            margin,
            witness: w,
            verdict: margin >= strictness,
        });
    }
    let verdict = match ((below[0].verdict, below[1].verdict), (above[0].verdict, above[1].verdict)) {
        ((true, true), _) => Nonexistence::Cond1,
        (_, (true, true)) => Nonexistence::Cond2,
        ((true, _), (_, true)) | ((_, true), (true, _)) => Nonexistence::Mixed,
        _ => Nonexistence::None,
    };
    Ok(NonexistenceRecord { verdict, cap, density, below, above })
}

fn region_for(i: usize, t: [f64; 2], own: [f64; 2], other: [f64; 2]) -> BoxSpec {
    if i == 0 {
        BoxSpec::new(t, own, other)
    } else {
        BoxSpec::new(t, other, own)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenWhich {
    I0Zero,
    I0Infinity,
    I1Zero,
    I1Infinity,
}

/// Spectral data for the eigenvalue conditions.
pub struct EigenInputs<'a> {
    /// `mu(L_i)` for the `|k| g` operators on `[0,1]`.
    pub mu_abs: [f64; 2],
    /// `mu(L_i+)` for the `k+ g` operators on `[a_i,b_i]`.
    pub mu_pos: [f64; 2],
    /// Discretized `L_i`, needed for the resolvent bound at infinity.
    pub abs_matrices: Option<[&'a NystromMatrix; 2]>,
    /// Spectral radii of `abs_matrices`.
    pub r_abs: [f64; 2],
}

/// Checks one of the four eigenvalue conditions. `radius` is `rho0` for the
/// conditions near zero and `R1` for those at infinity, `cap` bounds the
/// sampling of unbounded ranges. Without a user `eps`, half the observed
/// margin is used (the smallest one when both components must pass).
#[allow(clippy::too_many_arguments)]
pub fn check_eigen_condition(
    p: &ProblemSpec,
    which: EigenWhich,
    inputs: &EigenInputs<'_>,
    eps: Option<f64>,
    radius: f64,
    cap: f64,
    density: usize,
    strictness: f64,
) -> Result<ConditionRecord> {
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("eigenvalue condition radius must be positive, got {radius}")));
    }
    if let Some(e) = eps {
        if !(e > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {e}")));
        }
    }
    let c = p.c();
    let intervals = p.intervals();
    let mut raw = Vec::with_capacity(2);
    for i in 0..2 {
        let (mode, t_axis, own, other) = match which {
            EigenWhich::I0Zero => (
                Mode::Inf,
                uniform_axis(intervals[i][0], intervals[i][1], density),
                geometric_axis(radius * RATIO_FLOOR, radius, density),
                uniform_axis(-radius, radius, density),
            ),
            EigenWhich::I0Infinity => (
                Mode::Inf,
                uniform_axis(intervals[i][0], intervals[i][1], density),
                geometric_axis(c[i] * radius, cap.max(c[i] * radius), density),
                uniform_axis(-cap, cap, density),
            ),
            EigenWhich::I1Zero => (
                Mode::Sup,
                uniform_axis(0.0, 1.0, density),
                signed_geometric_axis(radius * RATIO_FLOOR, radius, density, true),
                uniform_axis(-radius, radius, density),
            ),
            EigenWhich::I1Infinity => (
                Mode::Sup,
                uniform_axis(0.0, 1.0, density),
                signed_geometric_axis(radius, cap.max(radius), density, false),
                signed_geometric_axis(radius, cap.max(radius), density, false),
            ),
        };
        let region = region_for(i, span(&t_axis), span(&own), span(&other));
        let (value, witness) = ratio_scan(p, i, t_axis, own, other, mode)?;
        let mu = match which {
            EigenWhich::I0Zero | EigenWhich::I0Infinity => inputs.mu_pos[i],
            EigenWhich::I1Zero | EigenWhich::I1Infinity => inputs.mu_abs[i],
        };
        // margin before eps: how far the ratio clears mu
        let gap = match mode {
            Mode::Inf => value - mu,
            Mode::Sup => mu - value,
        };
        raw.push((region, value, witness, mu, gap));
    }
    let q = match which {
        EigenWhich::I0Zero => Quantifier::Any,
        _ => Quantifier::All,
    };
    let common_eps = eps.unwrap_or_else(|| {
        let g = raw.iter().map(|r| r.4).fold(f64::INFINITY, f64::min);
        if g > 0.0 {
            g / 2.0
        } else {
            0.0
        }
    });
    let comps: Vec<ComponentRecord> = raw
        .iter()
        .enumerate()
        .map(|(i, &(region, value, witness, mu, gap))| {
            let e = match (eps, q) {
                (Some(e), _) => e,
                (None, Quantifier::Any) => (gap / 2.0).max(0.0),
                (None, Quantifier::All) => common_eps,
            };
            let (threshold, margin) = match which {
                EigenWhich::I0Zero | EigenWhich::I0Infinity => (mu + e, value - (mu + e)),
                EigenWhich::I1Zero | EigenWhich::I1Infinity => (mu - e, (mu - e) - value),
            };
            ComponentRecord {
                component: i + 1,
                region,
                computed: value,
                threshold,
                margin,
                witness,
                verdict: e > 0.0 && margin >= strictness,
            }
        })
        .collect();
    let id = match which {
        EigenWhich::I0Zero => ConditionId::I0Zero,
        EigenWhich::I0Infinity => ConditionId::I0Infinity,
        EigenWhich::I1Zero => ConditionId::I1Zero,
        EigenWhich::I1Infinity => ConditionId::I1Infinity,
    };
    let mut rec = assemble(id, Some([radius, radius]), density, comps, q);
    rec.eps = Some(match (eps, q, rec.via) {
        (Some(e), _, _) => e,
        (None, Quantifier::Any, Some(k)) => (raw[k - 1].4 / 2.0).max(0.0),
        _ => common_eps,
    });
    if matches!(which, EigenWhich::I0Infinity | EigenWhich::I1Infinity) {
        rec.notes.push(format!("unbounded ranges sampled up to cap {cap:e}"));
    }
    if which == EigenWhich::I1Infinity && rec.verdict {
        if let Some(mats) = inputs.abs_matrices {
            let e = rec.eps.unwrap_or(0.0);
            let r0 = resolvent_radius(p, inputs, mats, e, radius, cap, density)?;
            rec.resolvent_r0 = Some(r0);
            rec.notes
                .push("envelope includes the mixed regions |u| >= R1 > |v| and |v| >= R1 > |u| up to the cap".into());
        }
    }
    Ok(rec)
}

/// `R0` for the condition at infinity: the envelope `phi_i(t)` bounds
/// `f_i - (mu_i - eps)|u_i|` wherever the growth inequality is not assumed,
/// and `C_i = int Phi g_i phi_i`.
fn resolvent_radius(
    p: &ProblemSpec,
    inputs: &EigenInputs<'_>,
    mats: [&NystromMatrix; 2],
    eps: f64,
    r1: f64,
    cap: f64,
    density: usize,
) -> Result<f64> {
    let n2 = (density / 2).max(8);
    let mut cs = [0.0; 2];
    for i in 0..2 {
        let a = mats[i];
        let lambda = inputs.mu_abs[i] - eps;
        let inner = uniform_axis(-r1, r1, n2);
        let outer = signed_geometric_axis(r1, cap.max(r1), n2, false);
        let phis: Vec<Result<f64>> = a
            .nodes
            .par_iter()
            .map(|&t| {
                let box_sup =
                    scan_axes(&|t, u, v| p.f_value(i, t, u, v), &[vec![t], inner.clone(), inner.clone()], Mode::Sup)?
                        .value;
                let excess = |t: f64, u: f64, v: f64| -> Result<f64> {
                    let x = if i == 0 { u } else { v };
                    Ok((p.f_value(i, t, u, v)? - lambda * x.abs()).max(0.0))
                };
                let mixed_a = scan_axes(&excess, &[vec![t], outer.clone(), inner.clone()], Mode::Sup)?.value;
                let mixed_b = scan_axes(&excess, &[vec![t], inner.clone(), outer.clone()], Mode::Sup)?.value;
                Ok(box_sup.max(mixed_a).max(mixed_b))
            })
            .collect();
        let mut c = 0.0;
        for (j, phi) in phis.into_iter().enumerate() {
            let t = a.nodes[j];
            c += a.weights[j] * p.kernels[i].phi_upper(t) * p.g[i].eval(t) * phi?;
        }
        cs[i] = c;
    }
    let items = [
        ResolventInput { matrix: mats[0], r: inputs.r_abs[0], mu: inputs.mu_abs[0], c: cs[0] },
        ResolventInput { matrix: mats[1], r: inputs.r_abs[1], mu: inputs.mu_abs[1], c: cs[1] },
    ];
    Ok(resolvent_bound_r0(&items, eps)?.r0)
}
