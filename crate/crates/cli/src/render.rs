//! Table rows as formatted strings, and their text/CSV/JSON renderings.
//!
//! Every format prints the same strings; only the layout differs.

use std::fmt::Write as _;
use std::str::FromStr;

use fracsum::numerics::{Complex, Real};
use fracsum::transform::{AccelerationResult, DiagnosticRow};
use serde::Serialize;

use crate::fixtures::Columns;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (text, csv, json)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub r: u64,
    pub partial: String,
    pub value: String,
    pub gamma: String,
    pub lambda: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderedTable {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<TableRow>,
    /// Ordered `(key, value)` pairs printed after the table.
    pub summary: Vec<(String, String)>,
}

pub fn headers(columns: Columns) -> Vec<String> {
    let (c3, c4, c6) = match columns {
        Columns::AbsoluteErrors => ("|A_R-S|", "|A0_n-S|", "Lambda0_n"),
        Columns::RelativeErrors => ("|A_R-S|/|S|", "|A0_n-S|/|S|", "Lambda0_n/|S|"),
        Columns::Values => ("A_R", "A0_n", "Lambda0_n"),
    };
    ["n", "R_n", c3, c4, "Gamma0_n", c6]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Three significant digits, the style of the error and indicator columns.
pub fn sci3(x: &Real) -> String {
    x.to_sci(3)
}

fn complex_sci3(z: &Complex) -> String {
    z.to_sci(3)
}

/// Λ as printed: divided by `|S|` in relative-error tables.
pub fn lambda_for(row: &DiagnosticRow, columns: Columns, known_s: Option<&Complex>) -> Real {
    match (columns, known_s) {
        (Columns::RelativeErrors, Some(s)) if !s.is_zero() => &row.lambda / &s.abs(),
        _ => row.lambda.clone(),
    }
}

pub fn table_row(row: &DiagnosticRow, columns: Columns, known_s: Option<&Complex>) -> TableRow {
    let (partial, value) = match columns {
        Columns::Values => (complex_sci3(&row.partial_sum), row.value.to_full()),
        _ => (
            row.partial_sum_error.as_ref().map(sci3).unwrap_or_default(),
            row.error.as_ref().map(sci3).unwrap_or_default(),
        ),
    };
    TableRow {
        n: row.n,
        r: row.r,
        partial,
        value,
        gamma: sci3(&row.gamma),
        lambda: sci3(&lambda_for(row, columns, known_s)),
    }
}

pub fn columns_for(res: &AccelerationResult, relative: bool) -> Columns {
    match (&res.known_s, relative) {
        (None, _) => Columns::Values,
        (Some(_), true) => Columns::RelativeErrors,
        (Some(_), false) => Columns::AbsoluteErrors,
    }
}

/// Rows `0, stride, 2 stride, ...`, always ending with the deepest row.
pub fn strided_rows(res: &AccelerationResult, columns: Columns, stride: usize) -> Vec<TableRow> {
    let stride = stride.max(1);
    let last = res.rows.len() - 1;
    res.rows
        .iter()
        .filter(|r| r.n % stride == 0 || r.n == last)
        .map(|r| table_row(r, columns, res.known_s.as_ref()))
        .collect()
}

pub fn render(t: &RenderedTable, format: Format) -> String {
    match format {
        Format::Text => render_text(t),
        Format::Csv => render_csv(t),
        Format::Json => serde_json::to_string_pretty(t).expect("plain data serializes") + "\n",
    }
}

fn cells(r: &TableRow) -> [String; 6] {
    [
        r.n.to_string(),
        r.r.to_string(),
        r.partial.clone(),
        r.value.clone(),
        r.gamma.clone(),
        r.lambda.clone(),
    ]
}

fn render_text(t: &RenderedTable) -> String {
    let mut widths: Vec<usize> = t.headers.iter().map(|h| h.len()).collect();
    for r in &t.rows {
        for (w, c) in widths.iter_mut().zip(cells(r)) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}", t.title);
    let line: Vec<String> = t
        .headers
        .iter()
        .zip(&widths)
        .map(|(h, w)| format!("{h:>w$}"))
        .collect();
    let _ = writeln!(out, "{}", line.join("  "));
    for r in &t.rows {
        let line: Vec<String> = cells(r)
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  "));
    }
    if !t.summary.is_empty() {
        out.push('\n');
        let kw = t.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &t.summary {
            let _ = writeln!(out, "{k:<kw$}  {v}");
        }
    }
    out
}

fn render_csv(t: &RenderedTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", t.headers.join(","));
    for r in &t.rows {
        let _ = writeln!(out, "{}", cells(r).join(","));
    }
    for (k, v) in &t.summary {
        let _ = writeln!(out, "# {k},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RenderedTable {
        RenderedTable {
            title: "ex5_2 aps:1,1 quad".into(),
            headers: headers(Columns::AbsoluteErrors),
            rows: vec![TableRow {
                n: 0,
                r: 1,
                partial: "3.68e-01".into(),
                value: "3.68e-01".into(),
                gamma: "1.00e+00".into(),
                lambda: "1.37e+00".into(),
            }],
            summary: vec![("best".into(), "n = 0".into())],
        }
    }

    #[test]
    fn formats_carry_identical_strings() {
        let t = sample();
        let text = render(&t, Format::Text);
        let csv = render(&t, Format::Csv);
        let json = render(&t, Format::Json);
        for s in ["3.68e-01", "1.00e+00", "1.37e+00"] {
            assert!(text.contains(s) && csv.contains(s) && json.contains(s));
        }
        assert!(csv.starts_with("n,R_n,|A_R-S|,|A0_n-S|,Gamma0_n,Lambda0_n\n0,1,3.68e-01"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"][0]["lambda"], "1.37e+00");
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
