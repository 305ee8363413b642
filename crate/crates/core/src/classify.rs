//! Structure of a term sequence from the asymptotic expansion of its ratio
//! `c(n) = a_{n+1}/a_n ~ sum_i c_i n^(s/m - i/m)`.
//!
//! The terms then behave like `[Γ(n)]^(s/m) exp(Q(n)) n^γ w(n)` with
//! `Q(n) = sum_{i<m} θ_i n^(1-i/m)`. This module recovers `θ` and `γ` from the
//! `c_i`, determines the exponent `σ = q/m` of the remainder model, and states
//! whether the series converges.

use std::fmt;

use rug::Rational;

use crate::error::{Error, Result};
use crate::numerics::{Complex, Precision, Real};

#[derive(Clone, Debug)]
pub struct RatioExpansion {
    /// `μ = s/m`.
    pub s: i64,
    pub m: u32,
    /// `c_0, ..., c_m`.
    pub c: Vec<Complex>,
}

impl RatioExpansion {
    pub fn new(s: i64, m: u32, c: Vec<Complex>) -> Result<RatioExpansion> {
        if m == 0 {
            return Err(Error::InvalidProblem("m must be at least 1".into()));
        }
        if c.len() != m as usize + 1 {
            return Err(Error::InvalidProblem(format!(
                "expected {} coefficients c_0..c_{m}, got {}",
                m + 1,
                c.len()
            )));
        }
        if c[0].is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        Ok(RatioExpansion { s, m, c })
    }

    pub fn mu(&self) -> Rational {
        Rational::from((self.s, self.m as i64))
    }
}

#[derive(Clone, Debug)]
pub struct StructuralParameters {
    pub m: u32,
    pub s: i64,
    /// `μ = s/m`.
    pub mu: Rational,
    /// `θ_0, ..., θ_{m-1}`; `θ_0` is the principal logarithm of `c_0`.
    pub theta: Vec<Complex>,
    pub gamma: Complex,
    /// `ζ = c_0 = e^(θ_0)`.
    pub zeta: Complex,
    /// `σ = q/m`.
    pub sigma: Rational,
    pub q: i64,
    /// Which of the five structural cases applies (1 to 5).
    pub case: u8,
    /// Magnitude below which coefficients were treated as zero.
    pub tolerance: f64,
}

/// Minimal field interface shared by the floating and the exact rational
/// evaluation of the log series.
trait Field: Clone {
    fn zero_like(&self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn mul_int(&self, k: i64) -> Self;
    fn div_int(&self, k: i64) -> Self;
}

impl Field for Complex {
    fn zero_like(&self) -> Self {
        let z = Real::from_float(rug::Float::new(self.prec_bits()));
        Complex::new(z.clone(), z)
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn mul_int(&self, k: i64) -> Self {
        let p = self.prec_bits();
        self.scale(&Real::from_float(rug::Float::with_val(p, k)))
    }
    fn div_int(&self, k: i64) -> Self {
        let p = self.prec_bits();
        self.scale(&Real::from_float(rug::Float::with_val(p, k)).recip())
    }
}

impl Field for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn div(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn mul_int(&self, k: i64) -> Self {
        Rational::from(self * k)
    }
    fn div_int(&self, k: i64) -> Self {
        Rational::from(self / k)
    }
}

/// Coefficients `ε_1..ε_m` of `log(1 + sum_i g_i z^i)` via the recurrence
/// `k ε_k = k g_k - sum_{j<k} j ε_j g_{k-j}` obtained from `f L' = f'`.
fn log_series<T: Field>(c: &[T]) -> Vec<T> {
    let m = c.len() - 1;
    let g: Vec<T> = c.iter().map(|ci| ci.div(&c[0])).collect();
    let mut eps: Vec<T> = Vec::with_capacity(m);
    for k in 1..=m {
        let mut acc = g[k].mul_int(k as i64);
        for j in 1..k {
            acc = acc.sub(&eps[j - 1].mul_int(j as i64).mul(&g[k - j]));
        }
        eps.push(acc.div_int(k as i64));
    }
    eps
}

/// `ε_1, ..., ε_m`.
pub fn epsilons_from_ratio(r: &RatioExpansion) -> Result<Vec<Complex>> {
    if r.c[0].is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    Ok(log_series(&r.c))
}

/// Exact `ε_1, ..., ε_m` for rational coefficients.
pub fn epsilons_exact(c: &[Rational]) -> Result<Vec<Rational>> {
    if c.is_empty() || c[0].is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    Ok(log_series(c))
}

/// Exact structure for rational coefficients: `(θ_1..θ_{m-1}, γ)` and `(σ, q)`.
/// `θ_0 = ln c_0` is not rational in general and is omitted; it vanishes
/// exactly when `c_0 = 1`.
pub fn structure_exact(s: i64, c: &[Rational]) -> Result<(Vec<Rational>, Rational, Rational, i64)> {
    let eps = epsilons_exact(c)?;
    let m = (c.len() - 1) as i64;
    let theta: Vec<Rational> = (1..m as usize)
        .map(|i| &eps[i - 1] / Rational::from((m - i as i64, m)))
        .collect();
    let gamma = eps[m as usize - 1].clone();
    let first_nonzero = (1..m as usize).find(|&i| !c[i].is_zero());
    let (q, _) = sigma_case(s, c[0] == 1, first_nonzero.map(|r| r as i64), m);
    Ok((theta, gamma, Rational::from((q, m)), q))
}

fn sigma_case(s: i64, c0_is_one: bool, first_r: Option<i64>, m: i64) -> (i64, u8) {
    if s > 0 {
        return (-s, 5);
    }
    if s < 0 {
        return (0, 4);
    }
    if !c0_is_one {
        return (0, 3);
    }
    match first_r {
        Some(r) => (r, 2),
        None => (m, 1),
    }
}

/// Structural parameters with exact zero tests.
pub fn structure_from_ratio(r: &RatioExpansion) -> Result<StructuralParameters> {
    structure_from_ratio_tol(r, 0.0)
}

/// Structural parameters treating `|c_0 - 1| <= tol` as `c_0 = 1` and
/// `|c_i| <= tol` as `c_i = 0`; intended for numerically fitted coefficients.
pub fn structure_from_ratio_tol(r: &RatioExpansion, tol: f64) -> Result<StructuralParameters> {
    let eps = epsilons_from_ratio(r)?;
    let m = r.m as usize;
    let p = r.c[0].prec_bits();
    let mut theta = Vec::with_capacity(m);
    theta.push(r.c[0].ln());
    for i in 1..m {
        let factor = Real::from_float(rug::Float::with_val(p, m as f64 / (m - i) as f64));
        // 1/(1 - i/m) = m/(m - i), exact for the small integers involved.
        theta.push(eps[i - 1].scale(&factor));
    }
    let gamma = eps[m - 1].clone();
    let one = Complex::from_real(Real::from_float(rug::Float::with_val(p, 1)));
    let c0_is_one = (&r.c[0] - &one).abs().to_f64() <= tol;
    let first_r = (1..m).find(|&i| r.c[i].abs().to_f64() > tol).map(|i| i as i64);
    let (q, case) = sigma_case(r.s, c0_is_one, first_r, m as i64);
    if c0_is_one {
        theta[0] = Complex::new(theta[0].re.clone(), theta[0].im.clone()).scale(&Real::from_float(
            rug::Float::with_val(p, 0),
        ));
    }
    Ok(StructuralParameters {
        m: r.m,
        s: r.s,
        mu: r.mu(),
        theta,
        gamma,
        zeta: r.c[0].clone(),
        sigma: Rational::from((q, r.m as i64)),
        q,
        case,
        tolerance: tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Antilimit {
    Abel,
    HadamardFinitePart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Converges,
    DivergesWithAntilimit(Antilimit),
    DivergesStrongly,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// The condition that decided the verdict.
    pub condition: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            VerdictKind::Converges => "converges",
            VerdictKind::DivergesWithAntilimit(Antilimit::Abel) => "diverges, Abel sum serves as antilimit",
            VerdictKind::DivergesWithAntilimit(Antilimit::HadamardFinitePart) => {
                "diverges, Hadamard finite part serves as antilimit"
            }
            VerdictKind::DivergesStrongly => "diverges strongly (no Abel sum or finite part)",
            VerdictKind::Indeterminate => "indeterminate",
        };
        write!(f, "{kind} [{}]", self.condition)
    }
}

fn verdict(kind: VerdictKind, condition: impl Into<String>) -> Verdict {
    Verdict {
        kind,
        condition: condition.into(),
    }
}

/// Convergence verdict with exact zero tests.
pub fn convergence_verdict(sp: &StructuralParameters, s: i64) -> Verdict {
    convergence_verdict_tol(sp, s, sp.tolerance)
}

/// Convergence verdict; quantities within `tol` of a boundary count as on it.
pub fn convergence_verdict_tol(sp: &StructuralParameters, s: i64, tol: f64) -> Verdict {
    let m = sp.m as f64;
    let re_gamma = sp.gamma.re.to_f64();
    let im_gamma = sp.gamma.im.to_f64();
    if s > 0 {
        return verdict(VerdictKind::DivergesStrongly, "s > 0");
    }
    if s < 0 {
        return verdict(VerdictKind::Converges, "s < 0");
    }
    match sp.case {
        1 => {
            let k = (re_gamma + 1.0) * m;
            if im_gamma.abs() <= tol && k > -tol && (k - k.round()).abs() <= tol * m.max(1.0) {
                return verdict(
                    VerdictKind::Indeterminate,
                    format!("γ + 1 = {}/{} lies on the excluded lattice i/m", k.round(), sp.m),
                );
            }
            if re_gamma < -1.0 {
                verdict(VerdictKind::Converges, "Re γ < -1")
            } else {
                verdict(
                    VerdictKind::DivergesWithAntilimit(Antilimit::HadamardFinitePart),
                    "Re γ >= -1",
                )
            }
        }
        2 | 3 => {
            let first = if sp.case == 2 { sp.q as usize } else { 0 };
            let dominant = (first..sp.m as usize).find(|&i| sp.theta[i].re.to_f64().abs() > tol);
            match dominant {
                Some(i) if sp.theta[i].re.to_f64() < 0.0 => verdict(
                    VerdictKind::Converges,
                    format!("Re θ_{i} < 0, so Re Q(n) -> -inf"),
                ),
                Some(i) => verdict(
                    VerdictKind::DivergesStrongly,
                    format!("Re θ_{i} > 0, so Re Q(n) -> +inf"),
                ),
                None if sp.case == 2 => {
                    let r = sp.q as f64;
                    if re_gamma < -r / m {
                        verdict(VerdictKind::Converges, format!("Re Q = 0 and Re γ < -{}/{}", sp.q, sp.m))
                    } else {
                        verdict(
                            VerdictKind::DivergesWithAntilimit(Antilimit::Abel),
                            format!("Re Q = 0 and Re γ >= -{}/{}", sp.q, sp.m),
                        )
                    }
                }
                None => {
                    if re_gamma < 0.0 {
                        verdict(VerdictKind::Converges, "|c_0| = 1, c_0 != 1 and Re γ < 0")
                    } else {
                        verdict(
                            VerdictKind::DivergesWithAntilimit(Antilimit::Abel),
                            "|c_0| = 1, c_0 != 1 and Re γ >= 0",
                        )
                    }
                }
            }
        }
        _ => verdict(VerdictKind::Indeterminate, "inconsistent structural case"),
    }
}

/// Fits `c_0..c_m` from sampled ratios `c(n) = a_{n+1}/a_n` by polynomial
/// interpolation of `c(n) n^(-s/m)` in `x = n^(-1/m)` over `nodes` integer
/// abscissae spread geometrically on `[n_lo, n_hi]`.
pub fn fit_ratio_expansion(
    s: i64,
    m: u32,
    ratio: impl Fn(u64, Precision) -> Complex,
    n_lo: u64,
    n_hi: u64,
    nodes: usize,
    p: Precision,
) -> Result<RatioExpansion> {
    if nodes < m as usize + 1 || n_lo < 2 || n_hi <= n_lo {
        return Err(Error::InvalidProblem("not enough fitting nodes".into()));
    }
    let mu = Rational::from((-s, m as i64));
    let ratio_hi = n_hi as f64 / n_lo as f64;
    let mut ns: Vec<u64> = (0..nodes)
        .map(|k| (n_lo as f64 * ratio_hi.powf(k as f64 / (nodes - 1) as f64)).round() as u64)
        .collect();
    ns.dedup();
    let xs: Vec<Complex> = ns
        .iter()
        .map(|&n| Complex::from_real(Real::int_pow_rational(n, &Rational::from((-1, m as i64)), p)))
        .collect();
    let ys: Vec<Complex> = ns
        .iter()
        .map(|&n| ratio(n, p).scale(&Real::int_pow_rational(n, &mu, p)))
        .collect();
    let coeffs = monomial_interpolant(&xs, &ys);
    let c = coeffs.into_iter().take(m as usize + 1).collect();
    RatioExpansion::new(s, m, c)
}

/// Rounds `ln(c(2n)/c(n)) / ln 2` to the nearest multiple of `1/m`, returning
/// the integer `s` with `μ = s/m`.
pub fn estimate_s(m: u32, ratio: impl Fn(u64, Precision) -> Complex, n: u64, p: Precision) -> i64 {
    let a = ratio(n, p).abs();
    let b = ratio(2 * n, p).abs();
    let mu = (&b / &a).ln().to_f64() / std::f64::consts::LN_2;
    (mu * m as f64).round() as i64
}

/// Monomial coefficients of the polynomial through `(x_i, y_i)`, computed
/// from the Newton form.
fn monomial_interpolant(xs: &[Complex], ys: &[Complex]) -> Vec<Complex> {
    let n = xs.len();
    let mut d = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            d[i] = &(&d[i] - &d[i - 1]) / &(&xs[i] - &xs[i - level]);
        }
    }
    let zero = ys[0].zero_like();
    let mut poly = vec![zero.clone(); n];
    // Horner on the Newton form: poly = d[n-1]; poly = poly*(x - x_k) + d[k].
    poly[0] = d[n - 1].clone();
    let mut deg = 0;
    for k in (0..n - 1).rev() {
        let mut next = vec![zero.clone(); n];
        for i in 0..=deg {
            next[i + 1] = &next[i + 1] + &poly[i];
            next[i] = &next[i] - &(&poly[i] * &xs[k]);
        }
        next[0] = &next[0] + &d[k];
        poly = next;
        deg += 1;
    }
    poly
}
