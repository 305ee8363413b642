//! Library side of the `fracsum` command: running a problem, classifying a
//! term sequence and reproducing the reference tables.

pub mod compare;
pub mod fixtures;
pub mod render;
pub mod reproduce;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use fracsum::classify::{
    convergence_verdict, estimate_s, fit_ratio_expansion, structure_from_ratio_tol, RatioExpansion,
    StructuralParameters, Verdict,
};
use fracsum::numerics::{parse_rational, Complex, Precision};
use fracsum::problem_file::load_path;
use fracsum::sampling::Schedule;
use fracsum::series_model::TermSource;
use fracsum::transform::accelerate;
use fracsum::{builtin, SeriesProblem};

use crate::render::{columns_for, headers, strided_rows, RenderedTable};

pub const DEFAULT_SCHEDULE: &str = "aps:1,1";
pub const DEFAULT_DEPTH: usize = 32;

#[derive(Clone, Debug)]
pub enum ProblemSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemSource,
    /// Overrides the schedule of a problem file; defaults to `aps:1,1`.
    pub schedule: Option<String>,
    pub depth: usize,
    pub precision: Precision,
    pub stride: usize,
}

fn load(source: &ProblemSource) -> Result<(SeriesProblem, Option<Schedule>)> {
    match source {
        ProblemSource::Builtin(id) => Ok((builtin(id)?, None)),
        ProblemSource::File(path) => {
            let loaded = load_path(path).with_context(|| format!("loading {}", path.display()))?;
            Ok((loaded.problem, loaded.schedule))
        }
    }
}

/// Runs the transformation and lays out the diagonal with a summary.
pub fn run(cfg: &RunConfig) -> Result<RenderedTable> {
    let (problem, file_schedule) = load(&cfg.problem)?;
    let (schedule, schedule_text) = match (&cfg.schedule, file_schedule) {
        (Some(s), _) => (Schedule::parse(s)?, s.clone()),
        (None, Some(s)) => (s, "from problem file".to_string()),
        (None, None) => (Schedule::parse(DEFAULT_SCHEDULE)?, DEFAULT_SCHEDULE.to_string()),
    };
    let res = accelerate(&problem, &schedule, cfg.depth, cfg.precision)?;
    let columns = columns_for(&res, problem.relative_errors);
    let (_, best_n) = res.best;
    let best = &res.rows[best_n];
    let mut summary = vec![
        ("problem".to_string(), problem.name.clone()),
        ("schedule".to_string(), schedule_text.clone()),
        ("precision".to_string(), cfg.precision.name()),
        ("best n".to_string(), format!("{best_n} (R = {})", best.r)),
        ("value".to_string(), res.value.to_full()),
        ("estimated abs error".to_string(), res.est_abs_error.to_sci(3)),
        ("estimated rel error".to_string(), res.est_rel_error.to_sci(3)),
    ];
    if let Some(s) = &res.known_s {
        let err = (&res.value - s).abs();
        summary.push(("exact sum".to_string(), s.to_full()));
        summary.push(("actual abs error".to_string(), err.to_sci(3)));
    }
    Ok(RenderedTable {
        title: format!("{} {} {}", problem.name, schedule_text, cfg.precision.name()),
        headers: headers(columns),
        rows: strided_rows(&res, columns, cfg.stride),
        summary,
    })
}

/// Structural parameters and verdict for a ratio expansion.
pub struct Classification {
    pub params: StructuralParameters,
    pub verdict: Verdict,
    /// Fitted coefficients, when classifying a problem numerically.
    pub fitted: Option<Vec<Complex>>,
}

/// Classifies `c(n) ~ sum_i c_i n^(mu - i/m)`; `mu` is a rational literal.
pub fn classify_coefficients(mu: &str, m: u32, c: &[String], p: Precision) -> Result<Classification> {
    let mu = parse_rational(mu)?;
    let s_rat = mu * m;
    if *s_rat.denom() != 1 {
        bail!("mu must be a multiple of 1/m");
    }
    let s = s_rat.numer().to_i64().context("mu out of range")?;
    let coeffs = c
        .iter()
        .map(|t| Complex::parse(t, p).with_context(|| format!("coefficient '{t}'")))
        .collect::<Result<Vec<_>>>()?;
    let ratio = RatioExpansion::new(s, m, coeffs)?;
    let params = structure_from_ratio_tol(&ratio, 0.0)?;
    let verdict = convergence_verdict(&params, s);
    Ok(Classification {
        params,
        verdict,
        fitted: None,
    })
}

/// Fits the ratio expansion of a problem's terms far out in the sequence.
pub fn classify_problem(source: &ProblemSource) -> Result<Classification> {
    let (problem, _) = load(source)?;
    let term = match problem.source() {
        TermSource::Pointwise(f) => f.clone(),
        TermSource::Product(_) => bail!("classification needs a series given term by term"),
    };
    let m = problem.m();
    // Wide exponent range: terms such as sqrt(n!) leave the quad range.
    let p = Precision::new(256, -1_000_000, 1_000_000)?;
    let ratio = move |n: u64, p: Precision| &term(n + 1, p) / &term(n, p);
    let s = estimate_s(m, &ratio, 4_000, p);
    let expansion = fit_ratio_expansion(s, m, &ratio, 1_000, 10_000, 16, p)?;
    let tol = 1e-12;
    let params = structure_from_ratio_tol(&expansion, tol)?;
    let verdict = fracsum::classify::convergence_verdict_tol(&params, s, tol);
    Ok(Classification {
        params,
        verdict,
        fitted: Some(expansion.c),
    })
}

pub fn describe(c: &Classification) -> String {
    let sp = &c.params;
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(&format!("{k:<8} {v}\n"));
    };
    if let Some(fit) = &c.fitted {
        for (i, ci) in fit.iter().enumerate() {
            line(&format!("c_{i}"), ci.to_sci(12));
        }
    }
    line("m", sp.m.to_string());
    line("mu", sp.mu.to_string());
    for (i, t) in sp.theta.iter().enumerate() {
        line(&format!("theta_{i}"), t.to_sci(12));
    }
    line("gamma", sp.gamma.to_sci(12));
    line("sigma", format!("{} (q = {})", sp.sigma, sp.q));
    line("case", sp.case.to_string());
    line("verdict", c.verdict.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracsum::classify::VerdictKind;

    #[test]
    fn run_default_schedule() {
        let cfg = RunConfig {
            problem: ProblemSource::Builtin("ex5_2".into()),
            schedule: None,
            depth: 8,
            precision: Precision::QUAD,
            stride: 4,
        };
        let t = run(&cfg).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![0, 4, 8]);
        assert!(t.summary.iter().any(|(k, v)| k == "schedule" && v == "aps:1,1"));
    }

    #[test]
    fn classify_literal_coefficients() {
        // c(n) ~ 1 - 2/n: terms like n^(-2), convergent.
        let c = classify_coefficients("0", 1, &["1".into(), "-2".into()], Precision::QUAD).unwrap();
        assert_eq!(c.verdict.kind, VerdictKind::Converges);
        assert!((c.params.gamma.re.to_f64() + 2.0).abs() < 1e-30);
    }

    #[test]
    fn classify_rejects_off_lattice_mu() {
        assert!(classify_coefficients("1/3", 2, &vec!["1".to_string(); 3], Precision::QUAD).is_err());
        let c = classify_coefficients("1/2", 2, &["1".into(), "0".into(), "0".into()], Precision::QUAD)
            .unwrap();
        assert_eq!(c.verdict.kind, VerdictKind::DivergesStrongly);
    }

    #[test]
    fn classify_builtin_exp_sqrt() {
        let c = classify_problem(&ProblemSource::Builtin("ex5_9".into())).unwrap();
        assert_eq!(c.verdict.kind, VerdictKind::Converges);
        assert!((c.params.theta[0].re.to_f64() + 0.2).abs() < 1e-10);
    }
}
