//! The full certificate run and its JSON report.

use serde::{Deserialize, Serialize};

use super::conclude::{conclude, Conclusion};
use super::conditions::{
    check_eigen_condition, check_i0, check_i0_star, check_i0_underline, check_i1, check_nonexistence, ConditionRecord,
    EigenInputs, EigenWhich, NonexistenceRecord,
};
use super::{Level, ProblemSpec, RadiiLadder};
use crate::bounds::{closed_form_m, compute_big_m, compute_m, compute_m_refined, cross_check_m, BoundResult};
use crate::error::{Error, Result};
use crate::settings::Settings;
use crate::spectral::{discretize, spectral_radius, KernelMode, SpectralResult};

pub const REPORT_SCHEMA: u32 = 1;

/// Radii for the eigenvalue conditions; each pair is checked when present.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenOptions {
    /// Radius for the conditions near zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    /// Radius for the conditions at infinity.
    #[serde(default, rename = "R1", skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub c: [f64; 2],
    pub intervals: [[f64; 2]; 2],
    pub m: [BoundResult; 2],
    pub m_refined: [BoundResult; 2],
    pub big_m: [BoundResult; 2],
    /// Closed forms of `m`, present for unit weights.
    pub m_closed_form: [Option<BoundResult>; 2],
}

impl ConstantsRecord {
    pub fn m_values(&self) -> [f64; 2] {
        [self.m[0].value, self.m[1].value]
    }

    pub fn big_m_values(&self) -> [f64; 2] {
        [self.big_m[0].value, self.big_m[1].value]
    }
}

/// `c_i`, `m_i`, refined `m_i` and `M_i` for both components. For unit
/// weights the numeric `m_i` is cross-checked against the closed form.
pub fn compute_constants(p: &ProblemSpec, settings: &Settings) -> Result<ConstantsRecord> {
    let opts = settings.scan();
    let mut m = Vec::with_capacity(2);
    let mut refined = Vec::with_capacity(2);
    let mut big = Vec::with_capacity(2);
    let mut closed = [None, None];
    for i in 0..2 {
        let k = &p.kernels[i];
        let mi = compute_m(k, &p.g[i], &opts)?;
        if p.g[i].is_unit() {
            cross_check_m(k, &mi)?;
            closed[i] = Some(closed_form_m(k));
        }
        m.push(mi);
        refined.push(compute_m_refined(k, &p.g[i], &opts)?);
        big.push(compute_big_m(k, &p.g[i], k.a, k.b, &opts)?);
    }
    Ok(ConstantsRecord {
        c: p.c(),
        intervals: p.intervals(),
        m: [m[0], m[1]],
        m_refined: [refined[0], refined[1]],
        big_m: [big[0], big[1]],
        m_closed_form: closed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub component: usize,
    /// `|k| g` on `[0,1]`.
    pub r_abs: f64,
    pub mu_abs: Option<f64>,
    /// `k+ g` on `[a,b]`.
    pub r_pos: f64,
    pub mu_pos: Option<f64>,
    pub n: usize,
    pub iterations: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub sampling: String,
    pub constants: ConstantsRecord,
    pub thresholds_m: [f64; 2],
    pub ladder: RadiiLadder,
    pub conditions: Vec<ConditionRecord>,
    pub nonexistence: NonexistenceRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenOptions>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub spectral: Vec<SpectralSummary>,
    pub conclusion: Conclusion,
    pub notes: Vec<String>,
    pub settings: Settings,
}

impl CertificateReport {
    /// The record for `id` at `level`, if it was evaluated.
    pub fn record(&self, id: super::ConditionId, level: Option<Level>) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|r| r.id == id && r.level == level)
    }
}

/// Spectral radii of `L_i` and `L_i+` for both components.
pub fn spectral_pair(
    p: &ProblemSpec,
    settings: &Settings,
) -> Result<Vec<(SpectralResult, SpectralResult, crate::spectral::NystromMatrix)>> {
    let s = &settings.spectral;
    (0..2)
        .map(|i| {
            let k = &p.kernels[i];
            let abs = discretize(k, &p.g[i], KernelMode::Abs, (0.0, 1.0), s.n)?;
            let pos = discretize(k, &p.g[i], KernelMode::PositivePart, (k.a, k.b), s.n)?;
            let ra = spectral_radius(&abs, s.tol, s.max_iter)?;
            let rp = spectral_radius(&pos, s.tol, s.max_iter)?;
            Ok((ra, rp, abs))
        })
        .collect()
}

pub fn certify(
    p: &ProblemSpec,
    ladder: &RadiiLadder,
    eigen: Option<&EigenOptions>,
    settings: &Settings,
) -> Result<CertificateReport> {
    let errs = settings.validate();
    if !errs.is_empty() {
        return Err(Error::Schema(errs));
    }
    ladder.validate()?;
    let constants = compute_constants(p, settings)?;
    let density = settings.box_density;
    let strict = settings.strictness;
    let m = if settings.refined_m {
        [constants.m_refined[0].value, constants.m_refined[1].value]
    } else {
        constants.m_values()
    };
    let big_m = constants.big_m_values();
    let mut notes = vec![format!(
        "sampled certificate, density {density}: suprema and infima over boxes are grid samples with one refinement pass, not rigorous bounds"
    )];
    if settings.refined_m {
        notes.push("I1 thresholds use the refined k+/k- bound".into());
    }

    let mut conditions = Vec::new();
    let equal = p.intervals_equal();
    for (level, radii) in ladder.levels() {
        let mut push = |mut rec: ConditionRecord| {
            rec.level = Some(level);
            conditions.push(rec);
        };
        push(check_i1(p, radii, m, density, strict)?);
        push(check_i0(p, radii, big_m, density, strict)?);
        if equal {
            push(check_i0_underline(p, radii, big_m, false, density, strict)?);
        }
        if level == Level::Rho {
            push(check_i0_star(p, radii, big_m, density, strict)?);
            if equal {
                push(check_i0_underline(p, radii, big_m, true, density, strict)?);
            }
        }
    }

    let cap_base = ladder.max_radius().unwrap_or(1.0).max(eigen.and_then(|e| e.r1).unwrap_or(0.0));
    let cap = settings.cap_factor * cap_base;
    let nonexistence = check_nonexistence(p, m, big_m, cap, density, strict)?;
    notes.push(format!("non-existence conditions sampled on |u|, |v| <= {cap:e}"));

    let mut spectral = Vec::new();
    if let Some(e) = eigen {
        let pairs = spectral_pair(p, settings)?;
        for (i, (ra, rp, _)) in pairs.iter().enumerate() {
            spectral.push(SpectralSummary {
                component: i + 1,
                r_abs: ra.r,
                mu_abs: ra.mu,
                r_pos: rp.r,
                mu_pos: rp.mu,
                n: ra.n,
                iterations: [ra.iterations, rp.iterations],
            });
        }
        let degenerate = pairs.iter().any(|(a, b, _)| a.degenerate || b.degenerate);
        if degenerate {
            notes.push("eigenvalue conditions skipped: a linear operator has zero spectral radius".into());
        } else {
            let inputs = EigenInputs {
                mu_abs: [1.0 / pairs[0].0.r, 1.0 / pairs[1].0.r],
                mu_pos: [1.0 / pairs[0].1.r, 1.0 / pairs[1].1.r],
                abs_matrices: Some([&pairs[0].2, &pairs[1].2]),
                r_abs: [pairs[0].0.r, pairs[1].0.r],
            };
            if let Some(rho0) = e.rho0 {
                for which in [EigenWhich::I0Zero, EigenWhich::I1Zero] {
                    conditions.push(check_eigen_condition(p, which, &inputs, e.eps, rho0, cap, density, strict)?);
                }
                notes.push("conditions near zero are checked in their finite-box form only".into());
            }
            if let Some(r1) = e.r1 {
                let cap = settings.cap_factor * r1;
                for which in [EigenWhich::I0Infinity, EigenWhich::I1Infinity] {
                    conditions.push(check_eigen_condition(p, which, &inputs, e.eps, r1, cap, density, strict)?);
                }
            }
        }
    }

    let conclusion = conclude(p, ladder, &conditions, Some(&nonexistence));
    Ok(CertificateReport {
        schema: REPORT_SCHEMA,
        problem: p.name.clone(),
        sampling: format!("sampled certificate, density {density}"),
        constants,
        thresholds_m: m,
        ladder: *ladder,
        conditions,
        nonexistence,
        eigen: eigen.copied(),
        spectral,
        conclusion,
        notes,
        settings: settings.clone(),
    })
}
