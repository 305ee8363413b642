//! The user-facing transformation: sample the series on a schedule, run the
//! W-algorithm and attach error estimates and a recommended entry.

use crate::error::{Error, Result};
use crate::numerics::{roundoff_unit, Complex, Precision, Real};
use crate::sampling::Schedule;
use crate::series_model::{product_to_series, ProductProblem, SeriesProblem, SeriesSamples, TrigPair};
use crate::w_algorithm::{build_table, ExtrapolationTable, Storage};

/// Per-row diagnostics of the `j = 0` diagonal.
#[derive(Clone, Debug)]
pub struct DiagnosticRow {
    pub n: usize,
    pub r: u64,
    /// `A_{R_n}`.
    pub partial_sum: Complex,
    /// `A^(0)_n`.
    pub value: Complex,
    pub gamma: Real,
    pub lambda: Real,
    /// `Γ u`.
    pub gamma_u: Real,
    /// `(Λ / |A^(0)_n|) u`.
    pub rel_estimate: Real,
    /// `|A_{R_n} - S|`, divided by `|S|` for relative-error problems.
    pub partial_sum_error: Option<Real>,
    /// `|A^(0)_n - S|`, divided by `|S|` for relative-error problems.
    pub error: Option<Real>,
}

#[derive(Clone, Debug)]
pub struct AccelerationResult {
    pub table: ExtrapolationTable,
    /// Chosen `(j, n)`; `j` is always 0.
    pub best: (usize, usize),
    pub value: Complex,
    /// `Λ u` at the chosen entry.
    pub est_abs_error: Real,
    /// `(Λ / |A|) u` at the chosen entry.
    pub est_rel_error: Real,
    /// `(n, Γ^(0)_n, Λ^(0)_n)`.
    pub stability_curve: Vec<(usize, Real, Real)>,
    /// Selection scores, one per diagonal entry.
    pub scores: Vec<Real>,
    pub rows: Vec<DiagnosticRow>,
    pub known_s: Option<Complex>,
}

/// Runs the transformation along the `j = 0` diagonal up to `depth`.
pub fn accelerate(
    problem: &SeriesProblem,
    schedule: &Schedule,
    depth: usize,
    p: Precision,
) -> Result<AccelerationResult> {
    accelerate_with(problem, schedule, depth, p, Storage::DiagonalOnly)
}

pub fn accelerate_with(
    problem: &SeriesProblem,
    schedule: &Schedule,
    depth: usize,
    p: Precision,
    storage: Storage,
) -> Result<AccelerationResult> {
    let r = schedule.prefix(depth + 1)?;
    let samples = problem.samples(*r.last().expect("nonempty prefix"), p)?;
    accelerate_samples(problem, &samples, &r, storage)
}

/// Runs the transformation on pre-generated samples.
pub fn accelerate_samples(
    problem: &SeriesProblem,
    samples: &SeriesSamples,
    r: &[u64],
    storage: Storage,
) -> Result<AccelerationResult> {
    let p = samples.precision();
    let table = build_table(samples, r, problem.m(), problem.sigma_hat(), storage)?;
    let known_s = problem.known_s(p);
    let rows = estimate_errors(&table, known_s.as_ref(), problem.relative_errors);
    let scores = selection_scores(&table);
    let best_n = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(n, _)| n)
        .expect("nonempty diagonal");
    let u = roundoff_unit(&p);
    let chosen = table.diagonal_entry(best_n);
    let est_abs_error = &chosen.lambda * &u;
    let est_rel_error = relative(&est_abs_error, &chosen.a.abs());
    let stability_curve = table
        .diagonal()
        .enumerate()
        .map(|(n, e)| (n, e.gamma.clone(), e.lambda.clone()))
        .collect();
    Ok(AccelerationResult {
        value: chosen.a.clone(),
        best: (0, best_n),
        est_abs_error,
        est_rel_error,
        stability_curve,
        scores,
        rows,
        known_s,
        table,
    })
}

fn relative(x: &Real, scale: &Real) -> Real {
    if scale.is_zero() {
        x.clone()
    } else {
        x / scale
    }
}

/// Score used to pick the recommended entry: the larger of the roundoff
/// estimate `max(Γu, Λu/|A|)` and a truncation proxy, the relative change
/// from the previous diagonal entry (from the next one when `n = 0`).
pub fn selection_scores(table: &ExtrapolationTable) -> Vec<Real> {
    let p = table.precision;
    let u = roundoff_unit(&p);
    let diag: Vec<_> = table.diagonal().collect();
    (0..diag.len())
        .map(|n| {
            let e = diag[n];
            let mag = e.a.abs();
            let roundoff = (&e.gamma * &u).max(relative(&(&e.lambda * &u), &mag));
            let neighbour = match n {
                0 if diag.len() > 1 => Some(diag[1]),
                0 => None,
                _ => Some(diag[n - 1]),
            };
            match neighbour {
                Some(o) => roundoff.max(relative(&(&e.a - &o.a).abs(), &mag)),
                None => roundoff,
            }
        })
        .collect()
}

/// Per-row diagnostics of the diagonal; true errors appear only when `S` is known.
pub fn estimate_errors(
    table: &ExtrapolationTable,
    known_s: Option<&Complex>,
    relative_errors: bool,
) -> Vec<DiagnosticRow> {
    let u = roundoff_unit(&table.precision);
    let scale = known_s.map(|s| s.abs());
    let err = |x: &Complex| -> Option<Real> {
        known_s.map(|s| {
            let e = (x - s).abs();
            match (&scale, relative_errors) {
                (Some(sc), true) => relative(&e, sc),
                _ => e,
            }
        })
    };
    table
        .diagonal()
        .enumerate()
        .map(|(n, e)| DiagnosticRow {
            n,
            r: table.r[n],
            partial_sum: table.sums_at_r[n].clone(),
            value: e.a.clone(),
            gamma: e.gamma.clone(),
            lambda: e.lambda.clone(),
            gamma_u: &e.gamma * &u,
            rel_estimate: relative(&(&e.lambda * &u), &e.a.abs()),
            partial_sum_error: err(&table.sums_at_r[n]),
            error: err(&e.a),
        })
        .collect()
}

/// Accelerates the partial products of `prod (1 + v_n)`.
pub fn accelerate_product(
    pp: &ProductProblem,
    schedule: &Schedule,
    depth: usize,
    p: Precision,
) -> Result<AccelerationResult> {
    let problem = product_to_series(pp);
    accelerate(&problem, schedule, depth, p)
}

/// Cosine and sine sums recovered from a trig pair.
#[derive(Clone, Debug)]
pub struct TrigSums {
    pub cosine: Complex,
    pub sine: Complex,
    pub plus: AccelerationResult,
    pub minus: Option<AccelerationResult>,
}

/// `S^(c) = (S+ + S-)/2` and `S^(s) = (S+ - S-)/(2i)`; with real `h` only `S+`
/// is accelerated and the sums are its real and imaginary parts.
pub fn sum_trig(
    pair: &TrigPair,
    schedule: &Schedule,
    depth: usize,
    p: Precision,
) -> Result<TrigSums> {
    let plus = accelerate(&pair.plus, schedule, depth, p)?;
    if pair.h_real {
        let zero = Real::zero(p);
        return Ok(TrigSums {
            cosine: Complex::new(plus.value.re.clone(), zero.clone()),
            sine: Complex::new(plus.value.im.clone(), zero),
            plus,
            minus: None,
        });
    }
    let minus = accelerate(&pair.minus, schedule, depth, p)?;
    let half = Real::from_ratio(1, 2, p);
    let cosine = (&plus.value + &minus.value).scale(&half);
    // (x)/(2i) = -i x / 2
    let sine = (&plus.value - &minus.value).mul_i().scale(&-half);
    Ok(TrigSums {
        cosine,
        sine,
        plus,
        minus: Some(minus),
    })
}

/// Convenience wrapper validating `depth` against an explicit schedule.
pub fn check_depth(schedule: &Schedule, depth: usize) -> Result<()> {
    match schedule.len_limit() {
        Some(len) if depth + 1 > len => Err(Error::InvalidSchedule(format!(
            "depth {depth} needs {} schedule values, only {len} given",
            depth + 1
        ))),
        _ => Ok(()),
    }
}
