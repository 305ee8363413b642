//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;

use fracsum::classify::{
    estimate_s, fit_ratio_expansion, structure_exact, structure_from_ratio_tol,
};
use fracsum::numerics::{roundoff_unit, Complex, Precision, Rational, Real};
use fracsum::sampling::Schedule;
use fracsum::series_model::{
    builtin, builtin_ids, telescoping_terms, TelescopingFamily, TelescopingType,
};
use fracsum::transform::{accelerate, AccelerationResult};
use fracsum::w_algorithm::{
    build_table, dense_oracle, gamma_from_weights, lambda_from_weights, Storage,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const Q: Precision = Precision::QUAD;

type Outcome = Result<String, String>;

fn run(id: &str, schedule: &str, depth: usize) -> AccelerationResult {
    let problem = builtin(id).expect("builtin");
    accelerate(&problem, &Schedule::parse(schedule).unwrap(), depth, Q).expect("acceleration")
}

fn err_at(res: &AccelerationResult, n: usize) -> f64 {
    res.rows[n].error.as_ref().expect("known S").to_f64()
}

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn schedule_exactness() -> Outcome {
    let gps13 = Schedule::gps_str("1.3").unwrap().prefix(33).unwrap();
    let want13 = [11u64, 29, 80, 227, 646, 1842, 5258];
    let got13: Vec<u64> = (8..=32).step_by(4).map(|n| gps13[n]).collect();
    let gps11 = Schedule::gps_str("1.1").unwrap().prefix(49).unwrap();
    let want11 = [22u64, 30, 42, 60, 86, 124, 179, 259];
    let got11: Vec<u64> = (20..=48).step_by(4).map(|n| gps11[n]).collect();
    check(
        got13 == want13 && got11 == want11,
        format!("gps:1.3 -> {got13:?}, gps:1.1 -> {got11:?}"),
    )
}

fn alternating_series() -> Outcome {
    let res = run("ex5_2", "aps:1,1", 32);
    let e20 = err_at(&res, 20);
    let worst_gamma = res
        .rows
        .iter()
        .map(|r| (r.gamma.to_f64() - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        e20 <= 1e-20 && worst_gamma <= 1e-20,
        format!("|A_20 - S| = {e20:.2e}, max |Γ - 1| = {worst_gamma:.2e}"),
    )
}

fn monotone_gps() -> Outcome {
    let res = run("ex5_1", "gps:1.3", 20);
    let (e16, e20) = (err_at(&res, 16), err_at(&res, 20));
    check(
        e16 <= 1e-10 && e20 <= 1e-17,
        format!("|A_16 - S| = {e16:.2e}, |A_20 - S| = {e20:.2e}"),
    )
}

fn divergent_antilimit() -> Outcome {
    let res = run("ex5_4", "aps:1,1", 16);
    let e16 = err_at(&res, 16);
    check(e16 <= 1e-12, format!("|A_16 - S| = {e16:.2e}"))
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

fn stability_indicators() -> Outcome {
    let a = run("ex5_1", "aps:1,1", 8);
    let (g, l) = (a.rows[8].gamma.to_f64(), a.rows[8].lambda.to_f64());
    let b = run("ex5_7", "aps:5,5", 12);
    let g2 = b.rows[12].gamma.to_f64();
    check(
        within_factor(g, 3.03e4, 5.0) && within_factor(l, 2.80e4, 5.0) && within_factor(g2, 1.03e3, 5.0),
        format!("ex5_1 aps n=8: Γ = {g:.2e}, Λ = {l:.2e}; ex5_7 aps:5,5 n=12: Γ = {g2:.2e}"),
    )
}

fn instability_onset() -> Outcome {
    let res = run("ex5_1", "aps:1,1", 40);
    let errs: Vec<f64> = (0..=40).map(|n| err_at(&res, n)).collect();
    let (best_n, best) = errs
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let decreasing = (4..=28).step_by(4).all(|n| errs[n] < errs[n - 4]);
    let gamma40 = res.rows[40].gamma.to_f64();
    let ok = decreasing
        && (24..=32).contains(&best_n)
        && errs[28] <= 1e-17
        && errs[40] > errs[28] * 100.0
        && gamma40 > 1e22;
    check(
        ok,
        format!(
            "minimum error {best:.2e} at n = {best_n}, error(28) = {:.2e}, error(40) = {:.2e}, Γ_40 = {gamma40:.2e}",
            errs[28], errs[40]
        ),
    )
}

fn product_limit() -> Outcome {
    let g = run("ex7_1", "gps:1.3", 20);
    let a = run("ex7_1", "aps:1,1", 16);
    let (eg, ea) = (err_at(&g, 20), err_at(&a, 16));
    check(
        eg <= 1e-23 && ea <= 1e-12,
        format!("relative error gps n=20: {eg:.2e}, aps n=16: {ea:.2e}"),
    )
}

fn rel(a: &Real, b: &Real) -> f64 {
    let scale = b.abs();
    let d = (a - b).abs();
    if scale.is_zero() {
        d.to_f64()
    } else {
        (d / scale).to_f64()
    }
}

/// Compares the recursion with the dense solve at every `j <= 2`, `n <= 8`
/// for the given schedule prefix. Returns the worst (value, Σγ, Γ/Λ) deviations.
fn oracle_deviation(id: &str, r: &[u64]) -> Result<(f64, f64, f64), String> {
    let problem = builtin(id).map_err(|e| e.to_string())?;
    let samples = problem
        .samples(*r.last().unwrap(), Q)
        .map_err(|e| format!("{id}: {e}"))?;
    let table = build_table(&samples, r, problem.m(), problem.sigma_hat(), Storage::Full)
        .map_err(|e| format!("{id}: {e}"))?;
    let zero = Real::zero(Q);
    let (mut dv, mut dw, mut dg) = (0f64, 0f64, 0f64);
    for j in 0..=2 {
        for n in 0..=8 {
            let entry = table.entry(j, n).expect("in table");
            let d = dense_oracle(&samples, r, problem.m(), problem.sigma_hat(), &zero, j, n)
                .map_err(|e| format!("{id} j={j} n={n}: {e}"))?;
            let scale = d.value.abs();
            let diff = (&entry.a - &d.value).abs();
            dv = dv.max(if scale.is_zero() { diff.to_f64() } else { (diff / scale).to_f64() });
            let sum = d.weights.iter().fold(Complex::zero(Q), |acc, w| &acc + w);
            dw = dw.max((&sum - &Complex::one(Q)).abs().to_f64());
            dg = dg.max(rel(&entry.gamma, &gamma_from_weights(&d)));
            dg = dg.max(rel(&entry.lambda, &lambda_from_weights(&d, &d.rhs)));
        }
    }
    Ok((dv, dw, dg))
}

fn oracle_equivalence() -> Outcome {
    let (mut dv, mut dw, mut dg) = (0f64, 0f64, 0f64);
    let mut cases = 0;
    for id in builtin_ids() {
        for sched in ["aps:1,1", "gps:1.3"] {
            let r = Schedule::parse(sched).unwrap().prefix(11).unwrap();
            let (a, b, c) = oracle_deviation(id, &r)?;
            dv = dv.max(a);
            dw = dw.max(b);
            dg = dg.max(c);
            cases += 1;
        }
    }
    // Random strictly increasing schedules on top of the exhaustive sweep.
    let mut runner = TestRunner::new(Config {
        cases: 24,
        failure_persistence: None,
        ..Config::default()
    });
    let ids = builtin_ids();
    let strategy = (0..ids.len(), proptest::collection::vec(1u64..6, 11));
    let worst = std::cell::Cell::new((0f64, 0f64, 0f64));
    let outcome = runner.run(&strategy, |(k, gaps)| {
        let mut r = Vec::with_capacity(gaps.len());
        let mut acc = 0;
        for g in gaps {
            acc += g;
            r.push(acc);
        }
        let (a, b, c) = oracle_deviation(ids[k], &r).map_err(TestCaseError::fail)?;
        let w = worst.get();
        worst.set((w.0.max(a), w.1.max(b), w.2.max(c)));
        prop_assert!(a <= 1e-20 && b <= 1e-25 && c <= 1e-20, "{} {r:?}: {a:e} {b:e} {c:e}", ids[k]);
        Ok(())
    });
    let w = worst.get();
    dv = dv.max(w.0);
    dw = dw.max(w.1);
    dg = dg.max(w.2);
    let msg = format!(
        "{cases} schedule sweeps + 24 random schedules: max rel diff {dv:.1e}, max |Σγ - 1| {dw:.1e}, max Γ/Λ rel diff {dg:.1e}"
    );
    match outcome {
        Err(e) => Err(format!("{msg}; {e}")),
        Ok(()) => check(dv <= 1e-20 && dw <= 1e-25 && dg <= 1e-20, msg),
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

/// Telescoping instances: the builtin ones and a grid over `m`, `s`, and `θ`.
fn families() -> Vec<(String, TelescopingFamily)> {
    let mut out: Vec<(String, TelescopingFamily)> = builtin_ids()
        .iter()
        .filter_map(|id| builtin(id).ok()?.family.map(|f| (id.to_string(), f.family)))
        .collect();
    use TelescopingType::{AlternatingSum as T2, Difference as T1};
    let extra = [
        (T1, 0, 1, vec![rat(-1, 2)]),
        (T2, 0, 1, vec![rat(0, 1)]),
        (T2, -1, 1, vec![rat(0, 1)]),
        (T1, -1, 2, vec![rat(0, 1), rat(1, 1)]),
        (T1, 0, 3, vec![rat(0, 1), rat(0, 1), rat(-1, 2)]),
        (T1, 0, 3, vec![rat(0, 1), rat(-1, 3), rat(1, 4)]),
        (T2, 2, 3, vec![rat(0, 1), rat(1, 1), rat(0, 1)]),
        (T1, 1, 3, vec![rat(-1, 10), rat(0, 1), rat(1, 2)]),
        (T2, -2, 3, vec![rat(1, 5), rat(-1, 2), rat(0, 1)]),
    ];
    for (k, s, m, theta) in extra {
        let f = TelescopingFamily::new(k, s, m, theta).unwrap();
        out.push((format!("{k:?} s={s} m={m} θ={:?}", f.theta), f));
    }
    out
}

fn telescoping_identity() -> Outcome {
    let u = roundoff_unit(&Q);
    let mut worst = 0f64;
    for (name, f) in families() {
        let problem = telescoping_terms(&f, name.clone());
        let samples = problem.samples(200, Q).map_err(|e| format!("{name}: {e}"))?;
        let mut max_abs = Real::zero(Q);
        for n in 1..=200u64 {
            let a = samples.sum(n);
            max_abs = max_abs.max(a.re.abs());
            let closed = f.closed_form_sum(n, Q);
            let ulps = ((&a.re - &closed).abs() / (&max_abs * &u)).to_f64();
            worst = worst.max(ulps / n as f64);
            if ulps > 8.0 * n as f64 {
                return Err(format!("{name}: n = {n} differs by {ulps:.1} ulps"));
            }
        }
    }
    check(true, format!("{} families, worst ulps/n = {worst:.2}", families().len()))
}

fn ratio_of(f: &TelescopingFamily) -> impl Fn(u64, Precision) -> Complex + '_ {
    move |n, p| {
        let l0 = f.ln_delta(n - 1, p);
        let l1 = f.ln_delta(n, p);
        let l2 = f.ln_delta(n + 1, p);
        let rho1 = (&l1 - &l0).exp();
        let rho2 = (&l2 - &l1).exp();
        let one = Real::one(p);
        // a_n = ±δ_{n-1} (ρ_n ∓ 1); the ratio needs only ρ_n and ρ_{n+1}.
        let v = match f.kind {
            TelescopingType::Difference => &rho1 * &(&(&rho2 - &one) / &(&rho1 - &one)),
            TelescopingType::AlternatingSum => -(&rho1 * &(&(&rho2 + &one) / &(&rho1 + &one))),
        };
        Complex::from_real(v)
    }
}

fn classifier_round_trip() -> Outcome {
    let p = Precision::new(256, -4931, 4932).unwrap();
    let mut worst = 0f64;
    for (name, f) in families() {
        let ratio = ratio_of(&f);
        let s = estimate_s(f.m, &ratio, 2000, p);
        if s != f.s {
            return Err(format!("{name}: recovered s = {s}, expected {}", f.s));
        }
        let fit = fit_ratio_expansion(s, f.m, &ratio, 1000, 10000, 16, p).map_err(|e| e.to_string())?;
        let sp = structure_from_ratio_tol(&fit, 1e-12).map_err(|e| e.to_string())?;
        let mut dev = 0f64;
        for i in 0..f.m as usize {
            let want_re = Real::from_rational(&f.theta[i], p);
            let want_im = if i == 0 && f.kind == TelescopingType::AlternatingSum {
                Real::pi(p)
            } else {
                Real::zero(p)
            };
            dev = dev.max((&sp.theta[i].re - &want_re).abs().to_f64());
            dev = dev.max((&sp.theta[i].im - &want_im).abs().to_f64());
        }
        // The classifier writes terms with Γ(n)^(s/m); the family uses (n!)^(s/m).
        let gamma = &f.predicted_gamma() + Rational::from((f.s, f.m as i64));
        dev = dev.max((&sp.gamma.re - &Real::from_rational(&gamma, p)).abs().to_f64());
        dev = dev.max(sp.gamma.im.abs().to_f64());
        worst = worst.max(dev);
        if dev > 1e-6 || sp.sigma != f.predicted_sigma() || sp.mu != Rational::from((f.s, f.m as i64)) {
            return Err(format!(
                "{name}: deviation {dev:.2e}, σ = {} (expected {}), μ = {}",
                sp.sigma,
                f.predicted_sigma(),
                sp.mu
            ));
        }
    }
    for (m, t) in [(1i64, 2i64), (2, 3), (3, 4), (4, 9)] {
        let mut c = vec![Rational::from(1)];
        c.extend((1..m).map(|_| Rational::new()));
        c.push(rat(-t, m));
        let (theta, gamma, sigma, q) = structure_exact(0, &c).map_err(|e| e.to_string())?;
        if !theta.iter().all(|x| x.is_zero()) || gamma != rat(-t, m) || sigma != 1 || q != m {
            return Err(format!("product case m={m}, t={t}: θ={theta:?}, γ={gamma}, σ={sigma}"));
        }
    }
    check(
        true,
        format!("{} families, worst fitted deviation {worst:.1e}; product case exact", families().len()),
    )
}

fn estimator_reliability() -> Outcome {
    // Convergent builtins with known S.
    let cases = [
        ("ex5_1", "aps:1,1", 40),
        ("ex5_1", "gps:1.3", 32),
        ("ex5_2", "aps:1,1", 32),
        ("ex5_2", "gps:1.3", 32),
        ("ex5_7", "aps:1,1", 64),
        ("ex5_7", "aps:5,5", 32),
        ("ex5_8", "aps:1,1", 32),
        ("ex5_8", "gps:1.3", 32),
        ("ex7_1", "aps:1,1", 32),
        ("ex7_1", "gps:1.3", 32),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (id, sched, depth) in cases {
        let res = run(id, sched, depth);
        let s = res.known_s.clone().expect("known S");
        let true_rel = ((&res.value - &s).abs() / s.abs()).to_f64();
        let est = res.est_rel_error.to_f64();
        let pass = true_rel <= 100.0 * est;
        ok &= pass;
        lines.push(format!("{id} {sched} n={}: {true_rel:.1e} vs {est:.1e}", res.best.1));
    }
    check(ok, lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("schedule exactness", schedule_exactness),
        ("convergent alternating series", alternating_series),
        ("convergent monotone series with GPS", monotone_gps),
        ("divergent series antilimit", divergent_antilimit),
        ("stability indicators at spot rows", stability_indicators),
        ("instability onset", instability_onset),
        ("infinite product with known limit", product_limit),
        ("oracle equivalence", oracle_equivalence),
        ("telescoping identity", telescoping_identity),
        ("classifier round trip", classifier_round_trip),
        ("estimator reliability", estimator_reliability),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
