//! Reading published numbers and comparing them with computed ones.

use fracsum::numerics::{Precision, Real};

/// Parses `2.72D+00`, `2.72e+00`, `-1.5` and the exponent-only form
/// `5.17+157` used when three exponent digits do not fit the column.
pub fn parse_published(text: &str, p: Precision) -> Option<Real> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    let mut normalized = t.replace(['D', 'd'], "e");
    if !normalized.contains(['e', 'E']) {
        // A sign after the first digit starts a bare exponent.
        let split = normalized
            .char_indices()
            .skip(1)
            .find(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i);
        if let Some(i) = split {
            normalized.insert(i, 'e');
        }
    }
    Real::parse(&normalized, p).ok()
}

/// `|a - b| / |b|`, or `|a - b|` when `b` is zero.
pub fn relative_difference(a: &Real, b: &Real) -> f64 {
    let d = (a - b).abs();
    if b.is_zero() {
        d.to_f64()
    } else {
        (d / b.abs()).to_f64()
    }
}

/// Ratio `max(a, b) / min(a, b)` of two positive numbers.
pub fn factor_between(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return f64::INFINITY;
    }
    if a > b {
        a / b
    } else {
        b / a
    }
}
