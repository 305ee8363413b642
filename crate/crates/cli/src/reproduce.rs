//! Recomputes the published tables and compares them row by row.
//!
//! Tolerances per column:
//!
//! * `R_n` must match exactly.
//! * The partial-sum column is printed to three digits: 1% relative.
//! * Error columns are compared to 2% where truncation dominates. Where the
//!   error is within a factor 100 of the roundoff floor `Λu` the digits are
//!   not reproducible; the row passes if our error stays below `1000 Λu` and
//!   is reported as roundoff-limited.
//! * Full-precision value columns must agree to `1000 Λu + 10 u |A|`.
//! * Γ and Λ: 2%, or a factor of 5 once `Γu > 1e-6`.
//!
//! At reduced precision, rows whose estimate `(Λ/|A|) u` reaches `1e-13` are
//! skipped and reported as precision-limited.

use std::fmt::Write as _;

use fracsum::numerics::{roundoff_unit, Precision, Real};
use fracsum::sampling::Schedule;
use fracsum::transform::{accelerate, AccelerationResult, DiagnosticRow};
use fracsum::{builtin, Error};
use serde::Serialize;

use crate::compare::{factor_between, parse_published, relative_difference};
use crate::fixtures::{Columns, Fixture, Row, FIXTURES};
use crate::render::lambda_for;

pub const SKIP_THRESHOLD: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    /// Passed with the loose roundoff-limited check.
    RoundoffLimited(String),
    Fail(String),
    /// Not compared: beyond the reliable range of the working precision.
    PrecisionLimited(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct RowCheck {
    pub n: usize,
    pub r: u64,
    #[serde(flatten)]
    pub status: RowStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub problem: String,
    pub schedule: String,
    pub precision: String,
    pub rows: Vec<RowCheck>,
    /// Set when the table could not be computed at all.
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// No failures, but some rows were skipped as precision-limited.
    SkippedOnly,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::SkippedOnly => 2,
        }
    }
}

impl TableReport {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| matches!(r.status, RowStatus::Fail(_)))
            .count()
            + usize::from(self.error.is_some())
    }

    pub fn skipped(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| matches!(r.status, RowStatus::PrecisionLimited(_)))
            .count()
    }

    pub fn outcome(&self) -> Outcome {
        if self.failures() > 0 {
            Outcome::Fail
        } else if self.skipped() > 0 {
            Outcome::SkippedOnly
        } else {
            Outcome::Pass
        }
    }
}

pub fn overall(reports: &[TableReport]) -> Outcome {
    let outcomes: Vec<Outcome> = reports.iter().map(TableReport::outcome).collect();
    if outcomes.contains(&Outcome::Fail) {
        Outcome::Fail
    } else if outcomes.contains(&Outcome::SkippedOnly) {
        Outcome::SkippedOnly
    } else {
        Outcome::Pass
    }
}

/// Fixtures whose problem id or `"<problem> <schedule>"` key equals `only`.
pub fn select(only: Option<&str>) -> Vec<&'static Fixture> {
    FIXTURES
        .iter()
        .filter(|f| only.is_none_or(|o| o == f.problem || o == f.key()))
        .collect()
}

fn compute(f: &Fixture, p: Precision) -> Result<AccelerationResult, Error> {
    let problem = builtin(f.problem)?;
    let schedule = Schedule::parse(f.schedule)?;
    accelerate(&problem, &schedule, f.depth(), p)
}

/// Reproduces one fixture at precision `p`.
pub fn reproduce_table(f: &Fixture, p: Precision) -> TableReport {
    let mut report = TableReport {
        problem: f.problem.to_string(),
        schedule: f.schedule.to_string(),
        precision: p.name(),
        rows: Vec::new(),
        error: None,
    };
    let res = match compute(f, p) {
        Ok(r) => r,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let reduced = p.mantissa_bits() < Precision::QUAD.mantissa_bits();
    for row in f.rows {
        let ours = &res.rows[row.n];
        let status = if reduced && ours.rel_estimate.to_f64() >= SKIP_THRESHOLD {
            RowStatus::PrecisionLimited(format!(
                "estimated error {} >= {SKIP_THRESHOLD:.0e}",
                ours.rel_estimate.to_sci(2)
            ))
        } else {
            check_row(row, ours, &res, f.columns, p)
        };
        report.rows.push(RowCheck {
            n: row.n,
            r: row.r,
            status,
        });
    }
    report
}

/// Reproduces fixtures concurrently; reports keep the input order.
pub fn reproduce_all(fixtures: &[&'static Fixture], p: Precision) -> Vec<TableReport> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = fixtures
            .iter()
            .map(|f| scope.spawn(move || reproduce_table(f, p)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("reproduction thread panicked"))
            .collect()
    })
}

fn published(text: &str, what: &str, p: Precision) -> Result<Real, String> {
    parse_published(text, p).ok_or_else(|| format!("unreadable published {what} '{text}'"))
}

fn check_row(
    row: &Row,
    ours: &DiagnosticRow,
    res: &AccelerationResult,
    columns: Columns,
    p: Precision,
) -> RowStatus {
    match check_row_inner(row, ours, res, columns, p) {
        Ok(None) => RowStatus::Pass,
        Ok(Some(note)) => RowStatus::RoundoffLimited(note),
        Err(e) => RowStatus::Fail(e),
    }
}

fn check_row_inner(
    row: &Row,
    ours: &DiagnosticRow,
    res: &AccelerationResult,
    columns: Columns,
    p: Precision,
) -> Result<Option<String>, String> {
    // Published numbers carry more digits than double; read them wide.
    let wide = Precision::QUAD;
    let u = roundoff_unit(&p).to_f64();
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    if ours.r != row.r {
        return Err(format!("R_n = {} but published {}", ours.r, row.r));
    }

    let s_abs = res.known_s.as_ref().map(|s| s.abs().to_f64()).unwrap_or(1.0);
    let lambda = lambda_for(ours, columns, res.known_s.as_ref()).to_f64();
    let gamma = ours.gamma.to_f64();
    // Roundoff floor for the value column, in the column's own units.
    let floor = match columns {
        Columns::RelativeErrors => ours.lambda.to_f64() * u / s_abs,
        _ => ours.lambda.to_f64() * u,
    };

    let partial_pub = published(row.partial, "A_R column", wide)?;
    let partial_ours = match columns {
        Columns::Values => ours.partial_sum.re.clone(),
        _ => ours.partial_sum_error.clone().expect("known S"),
    };
    let partial_floor = 10.0 * ours.r as f64 * u * ours.partial_sum.abs().to_f64().max(1.0) / s_abs;
    let dp = (&partial_ours - &partial_pub).abs().to_f64();
    if dp > 0.01 * partial_pub.abs().to_f64() + partial_floor {
        failures.push(format!(
            "A_R column {} vs published {}",
            partial_ours.to_sci(3),
            row.partial
        ));
    }

    let value_pub = published(row.value, "A0 column", wide)?;
    match columns {
        Columns::Values => {
            let tol = 1000.0 * floor + 10.0 * u * value_pub.abs().to_f64();
            let d = (&ours.value.re - &value_pub).abs().to_f64();
            if d > tol {
                failures.push(format!(
                    "A0_n = {} differs from published by {d:.2e} (tolerance {tol:.2e})",
                    ours.value.re.to_sci(20)
                ));
            }
        }
        _ => {
            let err = ours.error.clone().expect("known S");
            let e_pub = value_pub.to_f64();
            let e_ours = err.to_f64();
            if e_pub <= 100.0 * floor || e_ours <= 100.0 * floor {
                if e_ours <= 1000.0 * floor.max(u) {
                    notes.push(format!(
                        "error {} vs published {} near roundoff floor {floor:.1e}",
                        err.to_sci(3),
                        row.value
                    ));
                } else {
                    failures.push(format!(
                        "error {} exceeds 1000x roundoff floor {floor:.1e}",
                        err.to_sci(3)
                    ));
                }
            } else if relative_difference(&err, &value_pub) > 0.02 {
                failures.push(format!("error {} vs published {}", err.to_sci(3), row.value));
            }
        }
    }

    let unstable = gamma * u > 1e-6;
    for (name, ours_v, text) in [("Gamma", gamma, row.gamma), ("Lambda", lambda, row.lambda)] {
        let pub_v = published(text, name, wide)?.to_f64();
        let ok = if unstable {
            factor_between(ours_v, pub_v) <= 5.0
        } else {
            (ours_v - pub_v).abs() <= 0.02 * pub_v.abs()
        };
        if !ok {
            failures.push(format!("{name} {ours_v:.3e} vs published {text}"));
        }
    }

    if failures.is_empty() {
        Ok((!notes.is_empty()).then(|| notes.join("; ")))
    } else {
        Err(failures.join("; "))
    }
}

/// Text report grouped into one section per problem.
pub fn render_text(reports: &[TableReport]) -> String {
    let mut out = String::new();
    let mut current = "";
    for r in reports {
        if r.problem != current {
            current = &r.problem;
            let _ = writeln!(out, "== {} ==", r.problem);
        }
        let verdict = match r.outcome() {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::SkippedOnly => "PASS (some rows precision-limited, skipped)",
        };
        let _ = writeln!(out, "  {} [{}]: {verdict}", r.schedule, r.precision);
        if let Some(e) = &r.error {
            let _ = writeln!(out, "    error: {e}");
        }
        for row in &r.rows {
            let line = match &row.status {
                RowStatus::Pass => "ok".to_string(),
                RowStatus::RoundoffLimited(n) => format!("ok, roundoff-limited: {n}"),
                RowStatus::Fail(e) => format!("FAIL: {e}"),
                RowStatus::PrecisionLimited(n) => format!("precision-limited, skipped: {n}"),
            };
            let _ = writeln!(out, "    n={:<3} R={:<6} {line}", row.n, row.r);
        }
    }
    let total = reports.len();
    let failed = reports.iter().filter(|r| r.outcome() == Outcome::Fail).count();
    let skipped: usize = reports.iter().map(TableReport::skipped).sum();
    let _ = writeln!(
        out,
        "\n{} of {total} tables reproduced; {skipped} rows skipped as precision-limited",
        total - failed
    );
    out
}
