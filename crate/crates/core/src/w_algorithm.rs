//! The W-algorithm recursion for the extrapolation table `A^(j)_n` and its
//! stability indicators `Γ^(j)_n`, `Λ^(j)_n`, plus a dense linear solve of the
//! defining system used as an independent check.

use rug::Rational;

use crate::error::{Error, Result};
use crate::numerics::{roundoff_unit, Complex, Precision, Real};
use crate::series_model::SeriesSamples;

/// Which part of the triangle to retain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    /// Every entry with `j + n <= depth`.
    Full,
    /// Only the `j = 0` diagonal; the recursion keeps two antidiagonals.
    DiagonalOnly,
}

/// One table position: the W-algorithm quantities and the derived outputs.
#[derive(Clone, Debug)]
pub struct TableEntry {
    /// `M^(j)_n`.
    pub m: Complex,
    /// `N^(j)_n`.
    pub n: Complex,
    /// `H^(j)_n`.
    pub h: Real,
    /// `K^(j)_n`.
    pub k: Real,
    /// `A^(j)_n = M/N`.
    pub a: Complex,
    /// `Γ^(j)_n = |H/N|`.
    pub gamma: Real,
    /// `Λ^(j)_n = |K/N|`.
    pub lambda: Real,
}

#[derive(Clone, Debug)]
pub struct ExtrapolationTable {
    pub m: u32,
    pub sigma_hat: Rational,
    pub precision: Precision,
    /// `R_0, ..., R_depth`.
    pub r: Vec<u64>,
    /// `A_{R_l}`.
    pub sums_at_r: Vec<Complex>,
    /// The partial sums entering the model: `A_{R_l}`, or `A_{R_l - 1}` when
    /// `sigma_hat < 0`.
    pub base_values: Vec<Complex>,
    pub storage: Storage,
    /// `cells[n][j]` (full) or `cells[n][0]` only (diagonal).
    cells: Vec<Vec<TableEntry>>,
}

impl ExtrapolationTable {
    pub fn depth(&self) -> usize {
        self.r.len() - 1
    }

    /// Entry `(j, n)` if it was retained.
    pub fn entry(&self, j: usize, n: usize) -> Option<&TableEntry> {
        self.cells.get(n).and_then(|row| row.get(j))
    }

    /// `A^(0)_0, ..., A^(0)_depth` with their indicators.
    pub fn diagonal(&self) -> impl Iterator<Item = &TableEntry> {
        self.cells.iter().map(|row| &row[0])
    }

    pub fn diagonal_entry(&self, n: usize) -> &TableEntry {
        &self.cells[n][0]
    }
}

fn check(
    p: Precision,
    j: usize,
    n: usize,
    values: [&Real; 6],
) -> Result<()> {
    if values.iter().all(|v| v.is_finite() && p.contains(v)) {
        Ok(())
    } else {
        Err(Error::TableOverflow { j, n })
    }
}

fn finish(p: Precision, j: usize, n: usize, m: Complex, nn: Complex, h: Real, k: Real) -> Result<TableEntry> {
    check(p, j, n, [&m.re, &m.im, &nn.re, &nn.im, &h, &k])?;
    if nn.is_zero() {
        return Err(Error::TableOverflow { j, n });
    }
    let a = &m / &nn;
    let nabs = nn.abs();
    let gamma = &h.abs() / &nabs;
    let lambda = &k.abs() / &nabs;
    check(p, j, n, [&a.re, &a.im, &gamma, &lambda, &gamma, &lambda])?;
    Ok(TableEntry {
        m,
        n: nn,
        h,
        k,
        a,
        gamma,
        lambda,
    })
}

/// `R^(-1/m)` at working precision.
fn node(r: u64, m: u32, p: Precision) -> Real {
    (-(&Real::from_u64(r, p).ln() / &Real::from_u64(m as u64, p))).exp()
}

/// Builds the table from partial sums and terms sampled at `R_l`:
/// `base_values[l]` is the left-hand side of the model equation and
/// `terms_at_r[l]` is `a_{R_l}`.
pub fn build_table_from_values(
    base_values: &[Complex],
    terms_at_r: &[Complex],
    r: &[u64],
    m: u32,
    sigma_hat: &Rational,
    storage: Storage,
    p: Precision,
) -> Result<ExtrapolationTable> {
    if r.is_empty() || base_values.len() != r.len() || terms_at_r.len() != r.len() {
        return Err(Error::InvalidSchedule(
            "schedule, partial sums and terms must have equal nonzero length".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidProblem("m must be at least 1".into()));
    }
    if r[0] == 0 || r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSchedule("R_l must be positive and strictly increasing".into()));
    }
    let depth = r.len() - 1;
    let x: Vec<Real> = r.iter().map(|&rv| node(rv, m, p)).collect();
    let mut cells: Vec<Vec<TableEntry>> = (0..=depth).map(|_| Vec::new()).collect();
    let mut prev: Vec<TableEntry> = Vec::new();

    for l in 0..=depth {
        let a_r = &terms_at_r[l];
        if a_r.is_zero() {
            return Err(Error::ZeroTerm { r: r[l] });
        }
        let omega = a_r.scale(&Real::int_pow_rational(r[l], sigma_hat, p));
        let n0 = omega.recip();
        let m0 = &base_values[l] * &n0;
        let mut h0 = n0.abs();
        let mut k0 = m0.abs();
        if l % 2 == 1 {
            h0 = -h0;
            k0 = -k0;
        }
        let mut cur = Vec::with_capacity(l + 1);
        cur.push(finish(p, l, 0, m0, n0, h0, k0)?);
        for n in 1..=l {
            let j = l - n;
            let d = &x[l] - &x[j];
            let up: &TableEntry = &cur[n - 1];
            let lo: &TableEntry = &prev[n - 1];
            let dc = Complex::from_real(d.clone());
            let mm = &(&up.m - &lo.m) / &dc;
            let nn = &(&up.n - &lo.n) / &dc;
            let hh = &(&up.h - &lo.h) / &d;
            let kk = &(&up.k - &lo.k) / &d;
            cur.push(finish(p, j, n, mm, nn, hh, kk)?);
        }
        match storage {
            Storage::Full => {
                for (n, e) in cur.iter().enumerate() {
                    cells[n].push(e.clone());
                }
            }
            Storage::DiagonalOnly => cells[l].push(cur[l].clone()),
        }
        prev = cur;
    }

    Ok(ExtrapolationTable {
        m,
        sigma_hat: sigma_hat.clone(),
        precision: p,
        r: r.to_vec(),
        sums_at_r: base_values.to_vec(),
        base_values: base_values.to_vec(),
        storage,
        cells,
    })
}

/// Builds the table for partial sums sampled at the schedule prefix `r`.
pub fn build_table(
    samples: &SeriesSamples,
    r: &[u64],
    m: u32,
    sigma_hat: &Rational,
    storage: Storage,
) -> Result<ExtrapolationTable> {
    let need = r.last().copied().unwrap_or(0);
    if need as usize > samples.len() {
        return Err(Error::OutOfRange {
            j: 0,
            n: r.len().saturating_sub(1),
        });
    }
    let base = model_lhs(samples, r, sigma_hat);
    let terms: Vec<Complex> = r.iter().map(|&rv| samples.term(rv)).collect();
    let mut t = build_table_from_values(&base, &terms, r, m, sigma_hat, storage, samples.precision())?;
    t.sums_at_r = r.iter().map(|&rv| samples.sum(rv)).collect();
    Ok(t)
}

fn model_lhs(samples: &SeriesSamples, r: &[u64], sigma_hat: &Rational) -> Vec<Complex> {
    let shift = u64::from(*sigma_hat < 0);
    r.iter().map(|&rv| samples.sum(rv - shift)).collect()
}

/// Solution of the `(n+1) x (n+1)` model system for one table position,
/// carried at the working precision plus guard bits.
#[derive(Clone, Debug)]
pub struct DenseSolve {
    pub j: usize,
    pub n: usize,
    /// The extrapolated value.
    pub value: Complex,
    /// Auxiliary unknowns `β_0, ..., β_{n-1}`.
    pub beta: Vec<Complex>,
    /// `γ_{n,i}` with `value = sum_i γ_{n,i} rhs_i`.
    pub weights: Vec<Complex>,
    /// Left-hand sides of the equations.
    pub rhs: Vec<Complex>,
    /// 1-norm condition number of the row-equilibrated system matrix.
    pub condition: f64,
}

struct Lu {
    lu: Vec<Vec<Complex>>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<Vec<Complex>>) -> Option<Lu> {
        let size = a.len();
        let mut perm: Vec<usize> = (0..size).collect();
        for col in 0..size {
            let pivot = (col..size)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .expect("nonempty");
            if a[pivot][col].is_zero() {
                return None;
            }
            a.swap(col, pivot);
            perm.swap(col, pivot);
            for row in col + 1..size {
                let f = &a[row][col] / &a[col][col];
                for k in col + 1..size {
                    let t = &f * &a[col][k];
                    a[row][k] = &a[row][k] - &t;
                }
                a[row][col] = f;
            }
        }
        Some(Lu { lu: a, perm })
    }

    fn solve(&self, b: &[Complex]) -> Vec<Complex> {
        let size = self.lu.len();
        let mut y: Vec<Complex> = self.perm.iter().map(|&i| b[i].clone()).collect();
        for i in 0..size {
            for k in 0..i {
                let t = &self.lu[i][k] * &y[k];
                y[i] = &y[i] - &t;
            }
        }
        for i in (0..size).rev() {
            for k in i + 1..size {
                let t = &self.lu[i][k] * &y[k];
                y[i] = &y[i] - &t;
            }
            y[i] = &y[i] / &self.lu[i][i];
        }
        y
    }
}

fn one_norm(cols: &[Vec<Complex>], p: Precision) -> Real {
    cols.iter()
        .map(|c| c.iter().fold(Real::zero(p), |acc, z| &acc + &z.abs()))
        .fold(Real::zero(p), Real::max)
}

/// Solves the model system for `(j, n)` directly by pivoted elimination,
/// with `(R_l + alpha)^(-i/m)` in place of `R_l^(-i/m)`.
pub fn dense_oracle(
    samples: &SeriesSamples,
    r: &[u64],
    m: u32,
    sigma_hat: &Rational,
    alpha: &Real,
    j: usize,
    n: usize,
) -> Result<DenseSolve> {
    let p = samples.precision();
    if j + n >= r.len() || r[j + n] as usize > samples.len() {
        return Err(Error::OutOfRange { j, n });
    }
    if !(alpha > &-(Real::from_u64(r[0], p))) {
        return Err(Error::InvalidProblem("alpha must exceed -R_0".into()));
    }
    // The reference solve carries guard bits beyond the working precision.
    let wp = p.guarded();
    let size = n + 1;
    let rows: Vec<u64> = r[j..=j + n].to_vec();
    let rhs = model_lhs(samples, &rows, sigma_hat);
    let wide_rhs: Vec<Complex> = rhs.iter().map(|z| z.round_to(wp)).collect();
    let mut mat = Vec::with_capacity(size);
    for &rv in &rows {
        let a_r = samples.term(rv).round_to(wp);
        if a_r.is_zero() {
            return Err(Error::ZeroTerm { r: rv });
        }
        let omega = a_r.scale(&Real::int_pow_rational(rv, sigma_hat, wp));
        let step = node_shifted(rv, &alpha.round_to(wp), m, wp);
        let mut row = Vec::with_capacity(size);
        row.push(Complex::one(wp));
        let mut w = omega;
        for _ in 0..n {
            row.push(w.clone());
            w = w.scale(&step);
        }
        mat.push(row);
    }
    // Row equilibration: the columns of ω-scaled rows can differ by many
    // orders of magnitude from the leading column of ones.
    let row_scale: Vec<Real> = mat
        .iter()
        .map(|row| row.iter().map(Complex::abs).fold(Real::zero(wp), Real::max).recip())
        .collect();
    for (row, d) in mat.iter_mut().zip(&row_scale) {
        for z in row.iter_mut() {
            *z = z.scale(d);
        }
    }
    let scaled_rhs: Vec<Complex> = wide_rhs.iter().zip(&row_scale).map(|(z, d)| z.scale(d)).collect();
    let cols: Vec<Vec<Complex>> = (0..size)
        .map(|c| mat.iter().map(|row| row[c].clone()).collect())
        .collect();
    let norm = one_norm(&cols, wp);
    let lu = Lu::factor(mat).ok_or(Error::SingularSystem {
        condition: f64::INFINITY,
    })?;
    let inverse_cols: Vec<Vec<Complex>> = (0..size)
        .map(|c| {
            let mut e = vec![Complex::zero(wp); size];
            e[c] = Complex::one(wp);
            lu.solve(&e)
        })
        .collect();
    let condition = (&norm * &one_norm(&inverse_cols, wp)).to_f64();
    if !condition.is_finite() || condition * roundoff_unit(&wp).to_f64() >= 1.0 {
        return Err(Error::SingularSystem { condition });
    }
    let x = lu.solve(&scaled_rhs);
    let weights: Vec<Complex> = inverse_cols
        .iter()
        .zip(&row_scale)
        .map(|(col, d)| col[0].scale(d))
        .collect();
    Ok(DenseSolve {
        j,
        n,
        value: x[0].clone(),
        beta: x[1..].to_vec(),
        weights,
        rhs,
        condition,
    })
}

fn node_shifted(r: u64, alpha: &Real, m: u32, p: Precision) -> Real {
    let base = &Real::from_u64(r, p) + alpha;
    (-(&base.ln() / &Real::from_u64(m as u64, p))).exp()
}

/// `Γ = sum_i |γ_i|`.
pub fn gamma_from_weights(d: &DenseSolve) -> Real {
    let p = d.value.prec_bits();
    d.weights
        .iter()
        .fold(Real::from_float(rug::Float::new(p)), |acc, w| &acc + &w.abs())
}

/// `Λ = sum_i |γ_i| |values_i|`; pass `d.rhs` for the model's own values.
pub fn lambda_from_weights(d: &DenseSolve, values: &[Complex]) -> Real {
    let p = d.value.prec_bits();
    d.weights
        .iter()
        .zip(values)
        .fold(Real::from_float(rug::Float::new(p)), |acc, (w, v)| {
            &acc + &(&w.abs() * &v.abs())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Schedule;
    use crate::series_model::builtin;

    const Q: Precision = Precision::QUAD;

    fn table(id: &str, sched: &str, depth: usize, storage: Storage) -> (ExtrapolationTable, SeriesSamples) {
        let problem = builtin(id).unwrap();
        let r = Schedule::parse(sched).unwrap().prefix(depth + 1).unwrap();
        let samples = problem.samples(*r.last().unwrap(), Q).unwrap();
        let t = build_table(&samples, &r, problem.m(), problem.sigma_hat(), storage).unwrap();
        (t, samples)
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        ((a - b).abs() / b.abs()).to_f64()
    }

    #[test]
    fn depth_zero_reproduces_first_partial_sum() {
        let (t, s) = table("ex5_1", "aps:1,1", 0, Storage::Full);
        let e = t.diagonal_entry(0);
        assert_eq!(e.a, s.sum(1));
        assert_eq!(e.gamma.to_f64(), 1.0);
        assert_eq!(e.lambda.to_sci(3), "6.32e-01");
    }

    #[test]
    fn first_column_is_partial_sums() {
        let (t, s) = table("ex5_3", "gps:1.3", 12, Storage::Full);
        for (j, &rv) in t.r.iter().enumerate() {
            let e = t.entry(j, 0).unwrap();
            assert!(rel(&e.a, &s.sum(rv)) < 1e-32);
            assert!((e.gamma.to_f64() - 1.0).abs() < 1e-30);
            assert!(((&e.lambda - &s.sum(rv).abs()).abs() / s.sum(rv).abs()).to_f64() < 1e-32);
        }
    }

    #[test]
    fn alternating_series_is_perfectly_stable() {
        let (t, _) = table("ex5_2", "aps:1,1", 12, Storage::Full);
        for n in 0..=12 {
            for j in 0..=12 - n {
                let g = t.entry(j, n).unwrap().gamma.to_f64();
                assert!((g - 1.0).abs() <= 1e-20, "j={j} n={n} Γ={g}");
            }
        }
        let err = (&t.diagonal_entry(8).a.re + &Real::one(Q)).abs();
        assert_eq!(err.to_sci(3), "3.33e-08");
    }

    #[test]
    fn diagonal_only_storage_matches_full() {
        let (full, _) = table("ex5_1", "aps:1,1", 10, Storage::Full);
        let (diag, _) = table("ex5_1", "aps:1,1", 10, Storage::DiagonalOnly);
        for n in 0..=10 {
            assert_eq!(full.diagonal_entry(n).a, diag.diagonal_entry(n).a);
            assert_eq!(full.diagonal_entry(n).gamma, diag.diagonal_entry(n).gamma);
        }
        assert!(diag.entry(1, 0).is_none());
        assert!(full.entry(1, 0).is_some());
    }

    #[test]
    fn spot_values_for_ex5_1() {
        let (t, s) = table("ex5_1", "aps:1,1", 8, Storage::Full);
        let e = t.diagonal_entry(8);
        let err = (&e.a.re + &Real::one(Q)).abs();
        assert_eq!(err.to_sci(3), "4.65e-04");
        assert_eq!(e.gamma.to_sci(3), "3.03e+04");
        assert_eq!(e.lambda.to_sci(3), "2.80e+04");
        let r = t.r.clone();
        let d = dense_oracle(&s, &r, 2, &Rational::from(1), &Real::zero(Q), 0, 8).unwrap();
        assert!(rel(&d.value, &e.a) < 1e-20);
        assert!(((&gamma_from_weights(&d) - &e.gamma).abs() / &e.gamma).to_f64() < 1e-20);
        let lam = lambda_from_weights(&d, &d.rhs);
        assert!(((&lam - &e.lambda).abs() / &e.lambda).to_f64() < 1e-20);
    }

    #[test]
    fn dense_oracle_trivial_cases() {
        let (_, s) = table("ex5_4", "aps:1,1", 3, Storage::Full);
        let d = dense_oracle(&s, &[1, 2, 3, 4], 2, &Rational::from(1), &Real::zero(Q), 2, 0).unwrap();
        assert_eq!(d.value, s.sum(3));
        assert_eq!(d.weights.len(), 1);
        assert_eq!(d.weights[0].re.to_f64(), 1.0);
        assert!(dense_oracle(&s, &[1, 2, 3, 4], 2, &Rational::from(1), &Real::zero(Q), 2, 2).is_err());
        assert!(dense_oracle(&s, &[1, 2], 2, &Rational::from(1), &Real::from_i64(-1, Q), 0, 1).is_err());
    }

    #[test]
    fn negative_sigma_hat_uses_previous_partial_sum() {
        let problem = builtin("ex5_2").unwrap();
        let r = vec![1, 2, 3, 4, 5];
        let s = problem.samples(5, Q).unwrap();
        let sh = Rational::from((-1, 2));
        let t = build_table(&s, &r, 2, &sh, Storage::Full).unwrap();
        for (j, &rv) in r.iter().enumerate() {
            assert_eq!(t.entry(j, 0).unwrap().a, s.sum(rv - 1));
        }
        let d = dense_oracle(&s, &r, 2, &sh, &Real::zero(Q), 0, 4).unwrap();
        assert!(rel(&d.value, &t.diagonal_entry(4).a) < 1e-25);
    }

    #[test]
    fn zero_term_is_reported_by_index() {
        let zeros = vec![Complex::one(Q), Complex::zero(Q)];
        let err = build_table_from_values(&zeros, &zeros, &[3, 7], 1, &Rational::from(1), Storage::Full, Q)
            .unwrap_err();
        assert_eq!(err, Error::ZeroTerm { r: 7 });
    }

    #[test]
    fn constant_data_extrapolates_to_itself() {
        let s = Complex::from_f64(0.3, -1.25, Q);
        let r: Vec<u64> = vec![1, 2, 4, 7, 11, 16, 22];
        let base = vec![s.clone(); r.len()];
        let terms: Vec<Complex> = (0..r.len())
            .map(|l| Complex::from_f64(1.0 + l as f64, (l as f64).sin(), Q))
            .collect();
        let t = build_table_from_values(&base, &terms, &r, 3, &Rational::from(1), Storage::Full, Q).unwrap();
        for n in 0..r.len() {
            for j in 0..r.len() - n {
                assert!(rel(&t.entry(j, n).unwrap().a, &s) < 1e-28, "j={j} n={n}");
            }
        }
    }
}
