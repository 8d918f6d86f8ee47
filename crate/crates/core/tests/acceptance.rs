//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails. Runs without the
//! libtest harness so the lines are printed under plain `cargo test`.

use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signcone::bounds::{
    closed_form_inv_m, closed_form_m, compute_m, optimal_interval, optimal_interval_numeric, relative_gap, theta1,
    vartheta1, vartheta2, ScanOptions,
};
use signcone::certify::conditions::{check_nonexistence, Nonexistence};
use signcone::certify::report::compute_constants;
use signcone::certify::{certify, ConditionId, Level, ProblemSpec, RadiiLadder};
use signcone::expr::Expression;
use signcone::kernel::{KernelSpec, KernelVariant};
use signcone::radial::{build_weights, AnnulusSpec, PhiMode, Substitution};
use signcone::settings::Settings;
use signcone::solver::{multistart, solve_newton, SolverGrid};
use signcone::spectral::{discretize, discretize_kernel, spectral_radius, DirichletGreen, KernelMode};
use signcone::weight::WeightFunction;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn example_constants() -> Outcome {
    let start = Instant::now();
    let p = ProblemSpec::worked_example();
    let k = compute_constants(&p, &Settings::default()).map_err(err)?;
    let elapsed = start.elapsed();
    ensure(k.c == [0.25, 0.5], format!("c = {:?}", k.c))?;
    let e2 = E * E;
    let expected = [
        ("m1", k.m[0].value, 384.0 / (65.0 * e2)),
        ("m2", k.m[1].value, 768.0 / (155.0 * e2)),
        ("M1", k.big_m[0].value, 384.0 / (37.0 * e2)),
        ("M2", k.big_m[1].value, 384.0 / (37.0 * e2)),
    ];
    let mut worst: f64 = 0.0;
    for (name, got, want) in expected {
        let gap = relative_gap(got, want);
        ensure(gap <= 1e-8, format!("{name} = {got}, expected {want}, rel err {gap:e}"))?;
        worst = worst.max(gap);
    }
    within(elapsed, 1.0)?;
    Ok(format!("c exact, worst rel err {worst:.1e} (tol 1e-8), {:.2} s", elapsed.as_secs_f64()))
}

fn example_certificate() -> Outcome {
    let start = Instant::now();
    let rep = certify(&ProblemSpec::worked_example(), &RadiiLadder::worked_example(), None, &Settings::default())
        .map_err(err)?;
    let elapsed = start.elapsed();
    let m = rep.constants.m_values();
    let big_m = rep.constants.big_m_values();

    let star = rep.record(ConditionId::I0Star, Some(Level::Rho)).ok_or("I0* missing")?;
    ensure(star.verdict && star.via == Some(1), format!("I0* verdict {} via {:?}", star.verdict, star.via))?;
    // the record is normalized by the radius: inf f1 / rho1
    let inf1 = star.components[0].computed / 6.0;
    ensure((inf1 - 0.25).abs() <= 1e-12, format!("inf f1 over rho box = {inf1}, expected 1/4"))?;
    ensure(inf1 > big_m[0] / 6.0, "1/4 > M1/6 fails")?;

    let i1 = rep.record(ConditionId::I1, Some(Level::R)).ok_or("I1 missing")?;
    ensure(i1.verdict, "I1 at r fails")?;
    let (s1, s2) = (i1.components[0].computed, i1.components[1].computed);
    ensure((s1 - 0.75).abs() <= 1e-12 && (s2 - 2.0 / 3.0).abs() <= 1e-12, format!("I1 sups {s1}, {s2}"))?;
    ensure(s1 < m[0] && s2 < m[1], "3/4 < m1 or 2/3 < m2 fails")?;
    let margin = m[1] - 2.0 / 3.0;
    ensure((margin - 3.9e-3).abs() < 5e-5, format!("margin {margin:e}"))?;

    let i0 = rep.record(ConditionId::I0, Some(Level::S)).ok_or("I0 missing")?;
    ensure(i0.verdict, "I0 at s fails")?;
    let (f1, f2) = (i0.components[0].computed * 3.0, i0.components[1].computed * 5.0);
    ensure((f1 - 7.0).abs() <= 1e-12 && (f2 - 25.0 / 3.0).abs() <= 1e-12, format!("I0 infs {f1}, {f2}"))?;
    ensure(f1 > big_m[0] * 3.0 && f2 > big_m[1] * 5.0, "7 > 3 M1 or 25/3 > 5 M2 fails")?;

    ensure(
        rep.conclusion.verdict == "at least 2 nontrivial solutions",
        format!("conclusion {:?}", rep.conclusion.verdict),
    )?;
    within(elapsed, 5.0)?;
    Ok(format!(
        "I0* via 1, I1 margin {margin:.3e}, I0 at (3,5), \"{}\", {:.2} s",
        rep.conclusion.verdict,
        elapsed.as_secs_f64()
    ))
}

fn closed_form_cross_checks() -> Outcome {
    let opts = ScanOptions::default();
    let one = WeightFunction::one();
    let mut variants = Vec::new();
    for alpha in [-0.1, -0.5, -1.0, -2.0, -4.0] {
        for eta in [0.2, 0.4, 0.5, 0.8] {
            variants.push(KernelVariant::ThreePoint { alpha, eta });
        }
    }
    for xi in [0.1, 0.25, 0.4, 0.6] {
        for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
            variants.push(KernelVariant::Derivative { alpha: frac * (1.0 - xi), xi });
        }
    }
    let (mut worst_m, mut worst_b, mut worst_big) = (0.0f64, 0.0f64, 0.0f64);
    let (mut at_zero, mut at_one) = (0, 0);
    for v in &variants {
        let k = KernelSpec::new(*v).map_err(err)?;
        let (t, inv) = closed_form_inv_m(v);
        let route = match *v {
            KernelVariant::ThreePoint { alpha, eta } if t == 0.0 => vartheta1(alpha, eta, 0.0),
            KernelVariant::ThreePoint { alpha, eta } => vartheta2(alpha, eta, 1.0),
            KernelVariant::Derivative { alpha, xi } => theta1(alpha, xi, 0.0),
        };
        ensure(inv == route, format!("{v:?}: closed form route mismatch"))?;
        if matches!(v, KernelVariant::ThreePoint { .. }) {
            if t == 0.0 {
                at_zero += 1;
            } else {
                at_one += 1;
            }
        }
        let numeric = compute_m(&k, &one, &opts).map_err(err)?;
        let gap = relative_gap(numeric.value, closed_form_m(&k).value);
        ensure(gap <= 1e-8, format!("{v:?}: m rel err {gap:e}"))?;
        worst_m = worst_m.max(gap);

        let cf = optimal_interval(&k);
        let num = optimal_interval_numeric(&k, &one, false, &opts).map_err(err)?;
        let db = (num.b - cf.b).abs();
        let dm = relative_gap(num.big_m, cf.big_m);
        ensure(db <= 1e-6 && dm <= 1e-8, format!("{v:?}: b gap {db:e}, M rel err {dm:e}"))?;
        worst_b = worst_b.max(db);
        worst_big = worst_big.max(dm);
    }
    ensure(at_zero > 0 && at_one > 0, "grid does not exercise both three-point routes")?;
    Ok(format!(
        "{} kernels, m rel err {worst_m:.1e} (tol 1e-8), b err {worst_b:.1e} (tol 1e-6), M rel err {worst_big:.1e} (tol 1e-8)",
        variants.len()
    ))
}

fn spectral_oracle() -> Outcome {
    let start = Instant::now();
    let a = discretize_kernel(&DirichletGreen, 0.0, 1.0, 256).map_err(err)?;
    let res = spectral_radius(&a, 1e-13, 100_000).map_err(err)?;
    let elapsed = start.elapsed();
    let gap = (res.r - 1.0 / (PI * PI)).abs();
    ensure(gap <= 1e-6, format!("r = {}, |r - 1/pi^2| = {gap:e}", res.r))?;
    ensure(res.eigvec.iter().all(|x| *x > 0.0), "eigenvector not positive")?;
    let top = res.eigvec.iter().cloned().fold(0.0, f64::max);
    let shape = res.nodes.iter().zip(&res.eigvec).map(|(t, x)| (x / top - (PI * t).sin()).abs()).fold(0.0, f64::max);
    ensure(shape <= 1e-3, format!("eigenvector shape error {shape:e}"))?;
    within(elapsed, 2.0)?;
    Ok(format!("|r - 1/pi^2| = {gap:.1e} (tol 1e-6), shape err {shape:.1e} (tol 1e-3), {:.2} s", elapsed.as_secs_f64()))
}

fn random_variant(rng: &mut ChaCha8Rng, three_point: bool) -> KernelVariant {
    if three_point {
        KernelVariant::ThreePoint { alpha: -rng.gen_range(0.05..5.0), eta: rng.gen_range(0.05..0.95) }
    } else {
        let xi = rng.gen_range(0.05..0.9);
        KernelVariant::Derivative { alpha: rng.gen_range(0.01..0.99) * (1.0 - xi), xi }
    }
}

fn operator_inequalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = [0usize; 2];
    let mut violations = 0usize;
    for (slot, three_point) in [true, false].into_iter().enumerate() {
        for _ in 0..20 {
            let k = KernelSpec::new(random_variant(&mut rng, three_point)).map_err(err)?;
            for _ in 0..50 {
                let t = rng.gen_range(0.0..=1.0);
                let s = rng.gen_range(0.0..=1.0);
                let phi = k.phi_upper(s);
                if k.eval(t, s).abs() > phi + 1e-14 {
                    violations += 1;
                }
                let ta = rng.gen_range(k.a..=k.b);
                if k.eval(ta, s) < k.c * phi - 1e-14 {
                    violations += 1;
                }
                samples[slot] += 1;
            }
        }
    }
    ensure(violations == 0, format!("{violations} violations"))?;

    let g = WeightFunction::parse("1 + t*(1-t)").map_err(err)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        let k = KernelSpec::new(random_variant(&mut rng, i % 2 == 0)).map_err(err)?;
        let abs = discretize(&k, &g, KernelMode::Abs, (0.0, 1.0), 48).map_err(err)?;
        let pos = discretize(&k, &g, KernelMode::PositivePart, (0.0, 1.0), 48).map_err(err)?;
        let ra = spectral_radius(&abs, 1e-12, 100_000).map_err(err)?.r;
        let rp = spectral_radius(&pos, 1e-12, 100_000).map_err(err)?.r;
        ensure(rp <= ra * (1.0 + 1e-9), format!("r(L+) = {rp} > r(L) = {ra} for {:?}", k.variant))?;
        worst = worst.max(rp - ra);
    }
    Ok(format!(
        "{} + {} samples, 0 violations; 20 configs r(L+) <= r(L), max r(L+) - r(L) = {worst:.2e}",
        samples[0], samples[1]
    ))
}

fn solver_closed_form() -> Outcome {
    let p = ProblemSpec::new(
        None,
        [KernelSpec::three_point(-1.0, 0.5).map_err(err)?, KernelSpec::derivative(0.25, 0.25).map_err(err)?],
        [WeightFunction::one(), WeightFunction::one()],
        [Expression::parse("0").map_err(err)?, Expression::parse("1").map_err(err)?],
    )
    .map_err(err)?;
    let grid = SolverGrid::new(&p, Settings::default().solver.cells).map_err(err)?;
    let x0 = grid.constant(&p, 0.0, 0.0).map_err(err)?;
    let sol = solve_newton(&p, &grid, &x0, 1e-13, 20, 1e-7).map_err(err)?.solution;
    let t = &sol.nodes;
    let v = &sol.v;
    let worst = t.iter().zip(v).map(|(t, v)| (v - (7.0 / 16.0 - t * t / 2.0)).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-10, format!("max |v - (7/16 - t^2/2)| = {worst:e}"))?;

    // three-point differences, exact for quadratics
    let d = |i: usize, j: usize, k: usize, at: f64| {
        let (a, b, c) = (t[i], t[j], t[k]);
        v[i] * (2.0 * at - b - c) / ((a - b) * (a - c))
            + v[j] * (2.0 * at - a - c) / ((b - a) * (b - c))
            + v[k] * (2.0 * at - a - b) / ((c - a) * (c - b))
    };
    let dv0 = d(0, 1, 2, 0.0);
    let xi = t.iter().position(|x| *x == 0.25).ok_or("xi is not a node")?;
    let dvxi = d(xi - 1, xi, xi + 1, 0.25);
    let n = t.len() - 1;
    let bc = v[n] - 0.25 * dvxi;
    ensure(dv0.abs() <= 1e-8 && bc.abs() <= 1e-8, format!("v'(0) = {dv0:e}, v(1) - a v'(xi) = {bc:e}"))?;
    Ok(format!("max err {worst:.1e} (tol 1e-10), v'(0) = {dv0:.1e}, v(1) - alpha v'(xi) = {bc:.1e}"))
}

fn multiplicity() -> Outcome {
    let start = Instant::now();
    let p = ProblemSpec::worked_example();
    let ladder = RadiiLadder::worked_example();
    let settings = Settings::default();
    let cert = certify(&p, &ladder, None, &settings).map_err(err)?;
    let rep = multistart(&p, &ladder, &settings.solver, &cert.conclusion.shells, Some(2)).map_err(err)?;
    let elapsed = start.elapsed();
    ensure(!rep.solutions.is_empty(), "no nontrivial solution found")?;
    for (k, s) in rep.solutions.iter().enumerate() {
        ensure(s.solution.residual <= 1e-8, format!("solution {k}: residual {:e}", s.solution.residual))?;
        ensure(
            s.solution.cone.iter().all(|c| c.slack >= -1e-6),
            format!("solution {k}: cone slack {:?}", s.solution.cone.map(|c| c.slack)),
        )?;
        ensure(!s.localization.shells.is_empty(), format!("solution {k} lies in no certified shell"))?;
    }
    within(elapsed, 60.0)?;
    if rep.solutions.len() < 2 {
        ensure(rep.status == "not found numerically", format!("status {:?}", rep.status))?;
        return Ok(format!(
            "only {} solution found, status \"{}\" (hard floor of one met)",
            rep.solutions.len(),
            rep.status
        ));
    }
    let shells: Vec<_> = rep.solutions.iter().map(|s| s.localization.shells.join(" / ")).collect();
    Ok(format!("{} solutions in shells {shells:?}, {:.1} s", rep.solutions.len(), elapsed.as_secs_f64()))
}

fn nonexistence_sanity() -> Outcome {
    let base = ProblemSpec::worked_example();
    let settings = Settings::default();
    let k = compute_constants(&base, &settings).map_err(err)?;
    let m = k.m_values();
    let f = [
        Expression::parse(&format!("{:?}*abs(u)", m[0] / 2.0)).map_err(err)?,
        Expression::parse(&format!("{:?}*abs(v)", m[1] / 2.0)).map_err(err)?,
    ];
    let p = ProblemSpec::new(None, base.kernels, base.g.clone(), f).map_err(err)?;
    let ne =
        check_nonexistence(&p, m, k.big_m_values(), 100.0, settings.box_density, settings.strictness).map_err(err)?;
    ensure(ne.verdict == Nonexistence::Cond1, format!("verdict {:?}", ne.verdict))?;
    let ladder = RadiiLadder::worked_example();
    let rep = multistart(&p, &ladder, &settings.solver, &[], None).map_err(err)?;
    ensure(rep.solutions.is_empty(), format!("{} nontrivial solutions", rep.solutions.len()))?;
    ensure(rep.trivial_found, "no run reached the zero solution")?;
    Ok(format!("cond1 holds, {} runs, none nontrivial", rep.runs))
}

fn radial_round_trip() -> Outcome {
    let sub = Substitution::new(3, 1.0, 2.0, PhiMode::Derived).map_err(err)?;
    ensure(sub.r(0.0) == 2.0 && sub.r(1.0) == 1.0, format!("r(0) = {}, r(1) = {}", sub.r(0.0), sub.r(1.0)))?;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for i in 1..100 {
        let t = i as f64 / 100.0;
        // fourth-order central difference
        let dr = (sub.r(t - 2.0 * h) - 8.0 * sub.r(t - h) + 8.0 * sub.r(t + h) - sub.r(t + 2.0 * h)) / (12.0 * h);
        worst = worst.max((sub.phi(t) - dr * dr).abs());
    }
    ensure(worst <= 1e-9, format!("max |phi - (r')^2| = {worst:e}"))?;

    let annulus = AnnulusSpec {
        n: 2,
        r1: 1.0,
        r0: E,
        h: [Expression::constant(1.0), Expression::constant(1.0)],
        alpha: [-1.0, 0.25],
        r_eta: E.sqrt(),
        r_xi: E.powf(0.75),
    };
    let red = build_weights(&annulus, PhiMode::PaperPrinted).map_err(err)?;
    let printed = red.g[0].expression().to_string();
    let mut mismatches = 0;
    for i in 0..=1000 {
        let t = i as f64 / 1000.0;
        if red.g[0].eval(t).to_bits() != (E * (1.0 - t)).powi(2).to_bits() {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, format!("{mismatches} of 1001 points differ from (e(1-t))^2"))?;
    Ok(format!("n=3 endpoints exact, |phi - (r')^2| <= {worst:.1e} (tol 1e-9); n=2 g = {printed}, bitwise equal at 1001 points"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("example constants", example_constants),
        ("example certificate", example_certificate),
        ("closed-form cross-checks", closed_form_cross_checks),
        ("spectral oracle", spectral_oracle),
        ("operator inequalities", operator_inequalities),
        ("solver closed form", solver_closed_form),
        ("multiplicity", multiplicity),
        ("non-existence sanity", nonexistence_sanity),
        ("radial round trip", radial_round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
