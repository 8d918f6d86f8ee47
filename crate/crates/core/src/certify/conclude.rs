//! Matching verified conditions and radius orderings against the
//! existence and multiplicity cases.
//!
//! | case | conditions (levels) | orderings (each component) | solutions |
//! |---|---|---|---|
//! | S1 | I0 or I0* (rho), I1 (r) | rho/c < r | 1 |
//! | S2 | I1 (rho), I0 (r) | rho < r | 1 |
//! | S3 | I0 or I0* (rho), I1 (r), I0 (s) | rho/c < r < s | 2 |
//! | S4 | I1 (rho), I0 (r), I1 (s) | rho < r, r/c < s | 2 |
//! | S5 | S3 and I1 (sigma) | S3 and s/c < sigma | 3 |
//! | S6 | S4 and I0 (sigma) | S4 and s < sigma | 3 |
//! | E1 | I0(0+), I1(inf) | | 1 |
//! | E2 | I1(0+), I0(inf) | | 1 |
//!
//! With equal intervals the underlined conditions stand in for I0 (and I0*).

use serde::{Deserialize, Serialize};

use super::conditions::{ConditionId, ConditionRecord, Nonexistence, NonexistenceRecord};
use super::{Level, ProblemSpec, RadiiLadder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    E1,
    E2,
}

impl Case {
    pub fn solutions(self) -> usize {
        match self {
            Case::S1 | Case::S2 | Case::E1 | Case::E2 => 1,
            Case::S3 | Case::S4 => 2,
            Case::S5 | Case::S6 => 3,
        }
    }
}

/// `K` bounds the sup norms, `V` bounds the minima over `[a_i,b_i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetKind {
    K,
    V,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRef {
    pub kind: SetKind,
    pub level: String,
    pub radii: [f64; 2],
    pub closed: bool,
}

/// A solution lies in `outer` but not in the closure of `inner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub label: String,
    pub outer: SetRef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<SetRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConclusionKind {
    Existence,
    Nonexistence,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub kind: ConclusionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<Case>,
    pub verdict: String,
    pub guaranteed_solutions: usize,
    pub shells: Vec<Shell>,
    pub matched_cases: Vec<Case>,
    pub diagnostics: Vec<String>,
}

struct Lookup<'a> {
    records: &'a [ConditionRecord],
}

impl Lookup<'_> {
    fn holds(&self, ids: &[ConditionId], level: Option<Level>) -> Option<ConditionId> {
        self.records.iter().find(|r| r.verdict && r.level == level && ids.contains(&r.id)).map(|r| r.id)
    }

    fn index_zero(&self, level: Level) -> bool {
        self.holds(&[ConditionId::I0, ConditionId::I0Underline], Some(level)).is_some()
    }

    fn index_zero_or_star(&self, level: Level) -> bool {
        self.index_zero(level)
            || self.holds(&[ConditionId::I0Star, ConditionId::I0UnderlineStar], Some(level)).is_some()
    }

    fn index_one(&self, level: Level) -> bool {
        self.holds(&[ConditionId::I1], Some(level)).is_some()
    }

    fn eigen(&self, id: ConditionId) -> Option<&ConditionRecord> {
        self.records.iter().find(|r| r.verdict && r.id == id)
    }
}

fn set(kind: SetKind, level: Level, radii: [f64; 2]) -> SetRef {
    SetRef { kind, level: level.name().into(), radii, closed: false }
}

fn shell(outer: SetRef, inner: SetRef) -> Shell {
    let name = |s: &SetRef| format!("{:?}({})", s.kind, s.level);
    Shell { label: format!("{} \\ closure {}", name(&outer), name(&inner)), outer, inner: Some(inner) }
}

/// Checks `lhs_i < rhs_i` for both components, recording a diagnostic on
/// failure.
fn ordered(lhs: [f64; 2], rhs: [f64; 2], what: &str, case: Case, diags: &mut Vec<String>) -> bool {
    let mut ok = true;
    for i in 0..2 {
        if !(lhs[i] < rhs[i]) {
            diags.push(format!(
                "{case:?} skipped: ordering {what} fails for component {}: {} >= {}",
                i + 1,
                lhs[i],
                rhs[i]
            ));
            ok = false;
        }
    }
    ok
}

fn div(x: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    [x[0] / c[0], x[1] / c[1]]
}

pub fn conclude(
    p: &ProblemSpec,
    ladder: &RadiiLadder,
    records: &[ConditionRecord],
    nonexistence: Option<&NonexistenceRecord>,
) -> Conclusion {
    use SetKind::{K, V};
    let look = Lookup { records };
    let c = p.c();
    let mut diags = Vec::new();
    let mut matched: Vec<(Case, Vec<Shell>)> = Vec::new();

    if let (Some(rho), Some(r)) = (ladder.rho, ladder.r) {
        // index 0 at rho, index 1 at r
        if look.index_zero_or_star(Level::Rho)
            && look.index_one(Level::R)
            && ordered(div(rho, c), r, "rho/c < r", Case::S1, &mut diags)
        {
            let first = shell(set(K, Level::R, r), set(V, Level::Rho, rho));
            matched.push((Case::S1, vec![first.clone()]));
            if let Some(s) = ladder.s {
                if look.index_zero(Level::S) && ordered(r, s, "r < s", Case::S3, &mut diags) {
                    let second = shell(set(V, Level::S, s), set(K, Level::R, r));
                    matched.push((Case::S3, vec![first.clone(), second.clone()]));
                    if let Some(sigma) = ladder.sigma {
                        if look.index_one(Level::Sigma)
                            && ordered(div(s, c), sigma, "s/c < sigma", Case::S5, &mut diags)
                        {
                            let third = shell(set(K, Level::Sigma, sigma), set(V, Level::S, s));
                            matched.push((Case::S5, vec![first, second, third]));
                        }
                    }
                }
            }
        }
        // index 1 at rho, index 0 at r
        if look.index_one(Level::Rho) && look.index_zero(Level::R) && ordered(rho, r, "rho < r", Case::S2, &mut diags) {
            let first = shell(set(V, Level::R, r), set(K, Level::Rho, rho));
            matched.push((Case::S2, vec![first.clone()]));
            if let Some(s) = ladder.s {
                if look.index_one(Level::S) && ordered(div(r, c), s, "r/c < s", Case::S4, &mut diags) {
                    let second = shell(set(K, Level::S, s), set(V, Level::R, r));
                    matched.push((Case::S4, vec![first.clone(), second.clone()]));
                    if let Some(sigma) = ladder.sigma {
                        if look.index_zero(Level::Sigma) && ordered(s, sigma, "s < sigma", Case::S6, &mut diags) {
                            let third = shell(set(V, Level::Sigma, sigma), set(K, Level::S, s));
                            matched.push((Case::S6, vec![first, second, third]));
                        }
                    }
                }
            }
        }
    }

    if let (Some(_), Some(inf)) = (look.eigen(ConditionId::I0Zero), look.eigen(ConditionId::I1Infinity)) {
        match inf.resolvent_r0 {
            Some(r0) => {
                let outer = SetRef { kind: K, level: "R0".into(), radii: [r0, r0], closed: true };
                let label = "closure K(R0), nontrivial".into();
                matched.push((Case::E1, vec![Shell { label, outer, inner: None }]));
            }
            None => diags.push("E1 skipped: the resolvent bound R0 was not computed".into()),
        }
    }
    if let (Some(_), Some(inf)) = (look.eigen(ConditionId::I1Zero), look.eigen(ConditionId::I0Infinity)) {
        let r1 = inf.radii.map(|r| r[0]).unwrap_or(f64::NAN);
        let outer = SetRef { kind: K, level: "R1".into(), radii: [r1, r1], closed: false };
        matched.push((Case::E2, vec![Shell { label: "K(R1), nontrivial".into(), outer, inner: None }]));
    }

    let best = matched.iter().max_by(|a, b| a.0.solutions().cmp(&b.0.solutions()).then(b.0.cmp(&a.0))).cloned();
    let matched_cases: Vec<Case> = matched.iter().map(|m| m.0).collect();
    let nonexist = nonexistence.map(|n| n.verdict).filter(|v| *v != Nonexistence::None);
    match best {
        Some((case, shells)) => {
            if let Some(v) = nonexist {
                diags.push(format!(
                    "non-existence condition {v:?} also holds on the sampled box; the sampled certificates are inconsistent"
                ));
            }
            let n = case.solutions();
            Conclusion {
                kind: ConclusionKind::Existence,
                case: Some(case),
                verdict: format!("at least {} nontrivial solution{}", n, if n == 1 { "" } else { "s" }),
                guaranteed_solutions: n,
                shells,
                matched_cases,
                diagnostics: diags,
            }
        }
        None => match nonexist {
            Some(v) => Conclusion {
                kind: ConclusionKind::Nonexistence,
                case: None,
                verdict: format!(
                    "no nontrivial solution ({v:?}, sampled up to |u|, |v| <= {})",
                    nonexistence.map(|n| n.cap).unwrap_or(f64::NAN)
                ),
                guaranteed_solutions: 0,
                shells: Vec::new(),
                matched_cases,
                diagnostics: diags,
            },
            None => Conclusion {
                kind: ConclusionKind::Inconclusive,
                case: None,
                verdict: "inconclusive".into(),
                guaranteed_solutions: 0,
                shells: Vec::new(),
                matched_cases,
                diagnostics: diags,
            },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::scan::BoxSpec;

    fn rec(id: ConditionId, level: Level, radii: [f64; 2], verdict: bool) -> ConditionRecord {
        ConditionRecord {
            id,
            level: Some(level),
            radii: Some(radii),
            computed: 1.0,
            threshold: 0.5,
            margin: if verdict { 0.5 } else { -0.5 },
            density: 8,
            verdict,
            via: None,
            eps: None,
            resolvent_r0: None,
            components: vec![super::super::conditions::ComponentRecord {
                component: 1,
                region: BoxSpec::new([0.0; 2], [0.0; 2], [0.0; 2]),
                computed: 1.0,
                threshold: 0.5,
                margin: 0.5,
                witness: [0.0; 3],
                verdict,
            }],
            notes: vec![],
        }
    }

    fn example_records(verdict: bool) -> Vec<ConditionRecord> {
        let l = RadiiLadder::worked_example();
        vec![
            rec(ConditionId::I0Star, Level::Rho, l.rho.unwrap(), verdict),
            rec(ConditionId::I1, Level::R, l.r.unwrap(), verdict),
            rec(ConditionId::I0, Level::S, l.s.unwrap(), verdict),
        ]
    }

    #[test]
    fn example_is_s3() {
        let p = ProblemSpec::worked_example();
        let c = conclude(&p, &RadiiLadder::worked_example(), &example_records(true), None);
        assert_eq!(c.case, Some(Case::S3));
        assert_eq!(c.guaranteed_solutions, 2);
        assert_eq!(c.verdict, "at least 2 nontrivial solutions");
        assert_eq!(c.shells.len(), 2);
        assert_eq!(c.shells[0].outer.kind, SetKind::K);
        assert_eq!(c.shells[1].outer.kind, SetKind::V);
        assert_eq!(c.matched_cases, vec![Case::S1, Case::S3]);
    }

    #[test]
    fn all_false_is_inconclusive() {
        let p = ProblemSpec::worked_example();
        let c = conclude(&p, &RadiiLadder::worked_example(), &example_records(false), None);
        assert_eq!(c.kind, ConclusionKind::Inconclusive);
        assert_eq!(c.guaranteed_solutions, 0);
    }

    #[test]
    fn ordering_violation_is_diagnosed() {
        let p = ProblemSpec::worked_example();
        // rho/c = (2, 2) is not below r = (1, 1)
        let ladder = RadiiLadder { rho: Some([0.5, 1.0]), r: Some([1.0, 1.0]), s: None, sigma: None };
        let recs =
            vec![rec(ConditionId::I0, Level::Rho, [0.5, 1.0], true), rec(ConditionId::I1, Level::R, [1.0, 1.0], true)];
        let c = conclude(&p, &ladder, &recs, None);
        assert_eq!(c.case, None);
        assert!(c.diagnostics.iter().any(|d| d.contains("S1 skipped")));
    }

    #[test]
    fn three_solution_cases() {
        let p = ProblemSpec::worked_example();
        let ladder =
            RadiiLadder { rho: Some([0.1, 0.1]), r: Some([1.0, 1.0]), s: Some([3.0, 3.0]), sigma: Some([20.0, 20.0]) };
        let recs = vec![
            rec(ConditionId::I0, Level::Rho, [0.1, 0.1], true),
            rec(ConditionId::I1, Level::R, [1.0, 1.0], true),
            rec(ConditionId::I0Underline, Level::S, [3.0, 3.0], true),
            rec(ConditionId::I1, Level::Sigma, [20.0, 20.0], true),
        ];
        let c = conclude(&p, &ladder, &recs, None);
        assert_eq!(c.case, Some(Case::S5));
        assert_eq!(c.shells.len(), 3);
        let recs = vec![
            rec(ConditionId::I1, Level::Rho, [0.1, 0.1], true),
            rec(ConditionId::I0, Level::R, [1.0, 1.0], true),
            rec(ConditionId::I1, Level::S, [5.0, 5.0], true),
            rec(ConditionId::I0, Level::Sigma, [20.0, 20.0], true),
        ];
        let ladder = RadiiLadder { s: Some([5.0, 5.0]), ..ladder };
        let c = conclude(&p, &ladder, &recs, None);
        assert_eq!(c.case, Some(Case::S6));
    }

    #[test]
    fn star_is_not_accepted_above_rho() {
        let p = ProblemSpec::worked_example();
        let l = RadiiLadder::worked_example();
        let recs = vec![
            rec(ConditionId::I0Star, Level::Rho, l.rho.unwrap(), true),
            rec(ConditionId::I1, Level::R, l.r.unwrap(), true),
            rec(ConditionId::I0Star, Level::S, l.s.unwrap(), true),
        ];
        assert_eq!(conclude(&p, &l, &recs, None).case, Some(Case::S1));
    }
}
