//! Series and product problems: term generators, partial sums, the
//! telescoping test families and the builtin catalogue.

use std::fmt;
use std::sync::Arc;

use rug::Rational;

use crate::error::{Error, Result};
use crate::numerics::{ln_factorial_frac, Complex, Precision, Real};

/// `n -> a_n` at a requested precision. Must be deterministic.
pub type TermFn = Arc<dyn Fn(u64, Precision) -> Complex + Send + Sync>;

/// A value such as a known limit, evaluated at a requested precision.
pub type ValueFn = Arc<dyn Fn(Precision) -> Complex + Send + Sync>;

#[derive(Clone)]
pub enum TermSource {
    /// Terms given pointwise.
    Pointwise(TermFn),
    /// Terms derived from a product `prod (1 + v_k)`; the function yields `v_n`.
    Product(TermFn),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Series,
    ProductDerived,
}

/// A series `sum a_n` (or a product recast as one) together with the data
/// the transformation needs.
#[derive(Clone)]
pub struct SeriesProblem {
    pub name: String,
    pub description: String,
    source: TermSource,
    m: u32,
    sigma_hat: Rational,
    known_s: Option<ValueFn>,
    kind: ProblemKind,
    /// Report errors relative to `|S|` rather than absolute.
    pub relative_errors: bool,
    pub family: Option<FamilyMetadata>,
    scale: Option<Complex>,
}

impl fmt::Debug for SeriesProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesProblem")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("sigma_hat", &self.sigma_hat)
            .field("kind", &self.kind)
            .field("has_known_s", &self.known_s.is_some())
            .finish()
    }
}

impl SeriesProblem {
    pub fn new(name: impl Into<String>, m: u32, term: TermFn) -> Result<SeriesProblem> {
        SeriesProblem::with_source(name, m, TermSource::Pointwise(term))
    }

    fn with_source(name: impl Into<String>, m: u32, source: TermSource) -> Result<SeriesProblem> {
        if m == 0 {
            return Err(Error::InvalidProblem("m must be at least 1".into()));
        }
        let kind = match source {
            TermSource::Pointwise(_) => ProblemKind::Series,
            TermSource::Product(_) => ProblemKind::ProductDerived,
        };
        Ok(SeriesProblem {
            name: name.into(),
            description: String::new(),
            source,
            m,
            sigma_hat: Rational::from(1),
            known_s: None,
            kind,
            relative_errors: false,
            family: None,
            scale: None,
        })
    }

    /// Sets the exponent in `ω_r = r^σ a_r`. It must be of the form `q/m` with
    /// integer `q <= m`.
    pub fn with_sigma_hat(mut self, sigma_hat: Rational) -> Result<SeriesProblem> {
        let q = Rational::from(&sigma_hat * self.m);
        if *q.denom() != 1 || sigma_hat > 1 {
            return Err(Error::InvalidProblem(format!(
                "sigma_hat must be q/{} with integer q <= {}, got {}",
                self.m, self.m, sigma_hat
            )));
        }
        self.sigma_hat = sigma_hat;
        Ok(self)
    }

    pub fn with_known_s(mut self, s: ValueFn) -> SeriesProblem {
        self.known_s = Some(s);
        self
    }

    pub fn with_description(mut self, d: impl Into<String>) -> SeriesProblem {
        self.description = d.into();
        self
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn sigma_hat(&self) -> &Rational {
        &self.sigma_hat
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn source(&self) -> &TermSource {
        &self.source
    }

    pub fn has_known_s(&self) -> bool {
        self.known_s.is_some()
    }

    pub fn known_s(&self, p: Precision) -> Option<Complex> {
        self.known_s.as_ref().map(|f| f(p))
    }

    /// Multiplies every term by `c`; the known limit, if any, scales too.
    pub fn scaled(&self, c: Complex) -> SeriesProblem {
        let mut out = self.clone();
        out.scale = Some(match &self.scale {
            Some(prev) => prev * &c,
            None => c.clone(),
        });
        if let Some(k) = &self.known_s {
            let k = k.clone();
            out.known_s = Some(Arc::new(move |p| &k(p) * &c.round_to(p)));
        }
        out
    }

    /// Samples `a_1..a_upto` and the partial sums.
    pub fn samples(&self, upto: u64, p: Precision) -> Result<SeriesSamples> {
        SeriesSamples::generate(self, upto, p)
    }
}

/// Terms and partial sums `A_0 = 0, A_1, ..., A_N`, generated once per run.
#[derive(Clone, Debug)]
pub struct SeriesSamples {
    precision: Precision,
    terms: Vec<Complex>,
    sums: Vec<Complex>,
}

impl SeriesSamples {
    pub fn generate(problem: &SeriesProblem, upto: u64, p: Precision) -> Result<SeriesSamples> {
        let mut s = SeriesSamples {
            precision: p,
            terms: vec![Complex::zero(p)],
            sums: vec![Complex::zero(p)],
        };
        s.extend_to(problem, upto)?;
        Ok(s)
    }

    /// Extends the cache so that `a_upto` and `A_upto` are available.
    pub fn extend_to(&mut self, problem: &SeriesProblem, upto: u64) -> Result<()> {
        let p = self.precision;
        let have = self.len() as u64;
        self.terms.reserve(upto.saturating_sub(have) as usize);
        self.sums.reserve(upto.saturating_sub(have) as usize);
        for n in have + 1..=upto {
            let prev = &self.sums[(n - 1) as usize];
            let scale = problem.scale.as_ref().map(|c| c.round_to(p));
            let a = match &problem.source {
                TermSource::Pointwise(f) => {
                    let a = f(n, p).round_to(p);
                    match &scale {
                        Some(c) => &a * c,
                        None => a,
                    }
                }
                TermSource::Product(v) => {
                    let v = v(n, p).round_to(p);
                    if n == 1 {
                        // Later terms inherit the scale through A_{n-1}.
                        let a = &Complex::one(p) + &v;
                        match &scale {
                            Some(c) => &a * c,
                            None => a,
                        }
                    } else {
                        if prev.is_zero() {
                            return Err(Error::ZeroPartialProduct { n: n - 1 });
                        }
                        &v * prev
                    }
                }
            };
            if !a.is_finite() || !p.contains(&a.re) || !p.contains(&a.im) {
                return Err(Error::Overflow { n });
            }
            let sum = prev + &a;
            if !p.contains(&sum.re) || !p.contains(&sum.im) {
                return Err(Error::Overflow { n });
            }
            self.terms.push(a);
            self.sums.push(sum);
        }
        Ok(())
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Largest available index `N`.
    pub fn len(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `a_n` for `1 <= n <= N` (`a_0` is reported as zero).
    pub fn term(&self, n: u64) -> Complex {
        self.terms[n as usize].clone()
    }

    /// `A_n` for `0 <= n <= N`.
    pub fn sum(&self, n: u64) -> Complex {
        self.sums[n as usize].clone()
    }

    pub fn term_ref(&self, n: u64) -> &Complex {
        &self.terms[n as usize]
    }

    pub fn sum_ref(&self, n: u64) -> &Complex {
        &self.sums[n as usize]
    }
}

/// `A_1, ..., A_N` by left-to-right accumulation.
pub fn partial_sums(problem: &SeriesProblem, upto: u64, p: Precision) -> Result<Vec<Complex>> {
    if upto == 0 {
        return Err(Error::InvalidProblem("partial_sums needs N >= 1".into()));
    }
    let s = problem.samples(upto, p)?;
    Ok(s.sums[1..].to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TelescopingType {
    /// `a_n = δ_n - δ_{n-1}`.
    Difference,
    /// `a_n = (-1)^n (δ_n + δ_{n-1})`.
    AlternatingSum,
}

/// `δ_n = (n!)^(s/m) exp(Q(n))` with `Q(n) = sum_{i<m} θ_i n^(1-i/m)`, so that
/// the induced telescoping series has sum (or antilimit) `-δ_0 = -1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TelescopingFamily {
    pub kind: TelescopingType,
    pub s: i64,
    pub m: u32,
    /// `θ_0, ..., θ_{m-1}`.
    pub theta: Vec<Rational>,
}

/// Predicted structure of a telescoping family, in the convention
/// `a_n = (n!)^(s/m) exp(Q(n)) n^γ w(n)` and `A_{n-1} = S + n^σ a_n g(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMetadata {
    pub family: TelescopingFamily,
    pub sigma: Rational,
    pub gamma: Rational,
}

impl TelescopingFamily {
    pub fn new(kind: TelescopingType, s: i64, m: u32, theta: Vec<Rational>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidProblem("m must be at least 1".into()));
        }
        if theta.len() != m as usize {
            return Err(Error::InvalidProblem(format!(
                "expected {m} coefficients θ_0..θ_{}, got {}",
                m - 1,
                theta.len()
            )));
        }
        Ok(TelescopingFamily { kind, s, m, theta })
    }

    /// First index `r in 1..m` with `θ_r != 0`.
    pub fn r(&self) -> Option<u32> {
        (1..self.m).find(|&i| !self.theta[i as usize].is_zero())
    }

    /// `ln δ_n`; zero at `n = 0`.
    pub fn ln_delta(&self, n: u64, p: Precision) -> Real {
        let mut acc = ln_factorial_frac(n, self.s, self.m, p);
        if n == 0 {
            return acc;
        }
        for (i, th) in self.theta.iter().enumerate() {
            if th.is_zero() {
                continue;
            }
            let e = Rational::from((self.m as i64 - i as i64, self.m as i64));
            let pw = Real::int_pow_rational(n, &e, p);
            acc = &acc + &(&pw * &Real::from_rational(th, p));
        }
        acc
    }

    pub fn delta(&self, n: u64, p: Precision) -> Real {
        self.ln_delta(n, p.guarded()).exp().round_to(p)
    }

    pub fn term(&self, n: u64, p: Precision) -> Real {
        let g = p.guarded();
        let d1 = self.ln_delta(n, g).exp();
        let d0 = self.ln_delta(n - 1, g).exp();
        let a = match self.kind {
            TelescopingType::Difference => &d1 - &d0,
            TelescopingType::AlternatingSum => {
                let t = &d1 + &d0;
                if n % 2 == 1 {
                    -t
                } else {
                    t
                }
            }
        };
        a.round_to(p)
    }

    /// Closed form of the partial sum: `-1 + δ_n` or `-1 + (-1)^n δ_n`.
    pub fn closed_form_sum(&self, n: u64, p: Precision) -> Real {
        let d = self.delta(n, p.guarded());
        let signed = match self.kind {
            TelescopingType::AlternatingSum if n % 2 == 1 => -d,
            _ => d,
        };
        (&signed - &Real::one(p.guarded())).round_to(p)
    }

    pub fn predicted_sigma(&self) -> Rational {
        let m = self.m as i64;
        let theta0_zero = self.theta[0].is_zero();
        match (self.kind, self.s.signum()) {
            (TelescopingType::Difference, 0) if theta0_zero => {
                Rational::from((self.r().unwrap_or(self.m) as i64, m))
            }
            (_, 1) => Rational::from((-self.s, m)),
            _ => Rational::from(0),
        }
    }

    /// γ in `a_n = (n!)^(s/m) exp(Q(n)) n^γ w(n)`.
    pub fn predicted_gamma(&self) -> Rational {
        let m = self.m as i64;
        match (self.kind, self.s.signum()) {
            (_, -1) => Rational::from((self.s.abs(), m)),
            (TelescopingType::Difference, 0) if self.theta[0].is_zero() => {
                Rational::from((-(self.r().unwrap_or(self.m) as i64), m))
            }
            _ => Rational::from(0),
        }
    }

    pub fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata {
            family: self.clone(),
            sigma: self.predicted_sigma(),
            gamma: self.predicted_gamma(),
        }
    }
}

/// Builds the series problem of a telescoping family (known `S = -1`).
pub fn telescoping_terms(f: &TelescopingFamily, name: impl Into<String>) -> SeriesProblem {
    let fam = f.clone();
    let term: TermFn = Arc::new(move |n, p| Complex::from_real(fam.term(n, p)));
    let mut problem = SeriesProblem::new(name, f.m, term)
        .expect("family m validated")
        .with_known_s(Arc::new(|p| Complex::from_real(-Real::one(p))));
    problem.family = Some(f.metadata());
    problem
}

/// A convergent product `prod (1 + v_n)` with `v_n ~ e n^(-t/m)`.
#[derive(Clone)]
pub struct ProductProblem {
    pub name: String,
    pub v: TermFn,
    pub m: u32,
    pub t: u32,
    pub known_s: Option<ValueFn>,
}

impl ProductProblem {
    pub fn new(name: impl Into<String>, v: TermFn, m: u32, t: u32) -> Result<ProductProblem> {
        if m == 0 {
            return Err(Error::InvalidProblem("m must be at least 1".into()));
        }
        if t < m + 1 {
            return Err(Error::InvalidProblem(format!(
                "product needs t >= m+1 for convergence, got t = {t}, m = {m}"
            )));
        }
        Ok(ProductProblem {
            name: name.into(),
            v,
            m,
            t,
            known_s: None,
        })
    }

    pub fn with_known_s(mut self, s: ValueFn) -> ProductProblem {
        self.known_s = Some(s);
        self
    }
}

/// Recasts a product as the series with `a_1 = 1 + v_1`, `a_n = v_n A_{n-1}`.
pub fn product_to_series(p: &ProductProblem) -> SeriesProblem {
    let mut s = SeriesProblem::with_source(p.name.clone(), p.m, TermSource::Product(p.v.clone()))
        .expect("product m validated");
    s.known_s = p.known_s.clone();
    s
}

/// Real polynomial `sum_k c_k n^(k/m)` of degree at most `m` in `n^(1/m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracPoly {
    pub m: u32,
    pub coeffs: Vec<Rational>,
}

impl FracPoly {
    pub fn new(m: u32, coeffs: Vec<Rational>) -> Result<FracPoly> {
        if coeffs.len() > m as usize + 1 {
            return Err(Error::InvalidProblem(format!(
                "polynomial in n^(1/{m}) must have degree <= {m}"
            )));
        }
        Ok(FracPoly { m, coeffs })
    }

    pub fn zero(m: u32) -> FracPoly {
        FracPoly { m, coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, n: u64, p: Precision) -> Real {
        let mut acc = Real::zero(p);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = Rational::from((k as i64, self.m as i64));
            acc = &acc + &(&Real::int_pow_rational(n, &e, p) * &Real::from_rational(c, p));
        }
        acc
    }
}

/// The pair `a_n^± = (n!)^(s/m) exp(u1(n) ± i u2(n)) h(n)`.
#[derive(Clone)]
pub struct TrigPair {
    pub plus: SeriesProblem,
    pub minus: SeriesProblem,
    /// Whether `h` is real-valued, which lets a single acceleration suffice.
    pub h_real: bool,
}

pub fn trig_series_pair(
    name: &str,
    h: TermFn,
    h_real: bool,
    u1: FracPoly,
    u2: FracPoly,
    s: i64,
    m: u32,
) -> Result<TrigPair> {
    if u1.m != m || u2.m != m {
        return Err(Error::InvalidProblem("u1, u2 must be polynomials in n^(1/m)".into()));
    }
    let make = |sign: i32| -> Result<SeriesProblem> {
        let (h, u1, u2) = (h.clone(), u1.clone(), u2.clone());
        let term: TermFn = Arc::new(move |n, p| {
            let g = p.guarded();
            let modulus = (&ln_factorial_frac(n, s, m, g) + &u1.eval(n, g)).exp();
            let phase = u2.eval(n, g);
            let phase = if sign < 0 { -phase } else { phase };
            let e = Complex::new(&modulus * &phase.cos(), &modulus * &phase.sin());
            (&e * &h(n, g)).round_to(p)
        });
        let suffix = if sign > 0 { "+" } else { "-" };
        SeriesProblem::new(format!("{name}{suffix}"), m, term)
    };
    Ok(TrigPair {
        plus: make(1)?,
        minus: make(-1)?,
        h_real,
    })
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn sqrt_term(sign_theta1: i64) -> Vec<Rational> {
    vec![rat(0, 1), rat(sign_theta1, 1)]
}

/// Builtin problem ids.
pub fn builtin_ids() -> &'static [&'static str] {
    &[
        "ex5_1", "ex5_2", "ex5_3", "ex5_4", "ex5_5", "ex5_6", "ex5_7", "ex5_8", "ex5_9", "ex5_10",
        "ex5_11", "ex5_12", "ex5_13", "ex5_14", "ex7_1", "ex7_2",
    ]
}

fn exp_sqrt_series(
    name: &str,
    description: &str,
    alternating: bool,
    s: i64,
    linear: Rational,
    root: i64,
) -> SeriesProblem {
    let term: TermFn = Arc::new(move |n, p| {
        let g = p.guarded();
        let nn = Real::from_u64(n, g);
        let mut e = &Real::from_rational(&linear, g) * &nn;
        e = &e + &(&nn.sqrt() * &Real::from_i64(root, g));
        e = &e + &ln_factorial_frac(n, s, 2, g);
        let v = e.exp();
        let v = if alternating && n % 2 == 1 { -v } else { v };
        Complex::from_real(v.round_to(p))
    });
    SeriesProblem::new(name, 2, term)
        .expect("m = 2")
        .with_description(description)
}

/// Looks up a builtin problem by id.
pub fn builtin(id: &str) -> Result<SeriesProblem> {
    use TelescopingType::{AlternatingSum as T2, Difference as T1};
    let fam = |kind, s, theta| TelescopingFamily::new(kind, s, 2, theta).expect("valid");
    let tel = |f: TelescopingFamily, d: &str| telescoping_terms(&f, id).with_description(d);
    let shifted = vec![rat(-1, 5), rat(1, 1)];
    let p = match id {
        "ex5_1" => tel(fam(T1, 0, sqrt_term(-1)), "a_n = e^(-sqrt n) - e^(-sqrt(n-1))"),
        "ex5_2" => tel(
            fam(T2, 0, sqrt_term(-1)),
            "a_n = (-1)^n (e^(-sqrt n) + e^(-sqrt(n-1)))",
        ),
        "ex5_3" => tel(fam(T1, 0, sqrt_term(1)), "a_n = e^(sqrt n) - e^(sqrt(n-1))"),
        "ex5_4" => tel(
            fam(T2, 0, sqrt_term(1)),
            "a_n = (-1)^n (e^(sqrt n) + e^(sqrt(n-1)))",
        ),
        "ex5_5" => exp_sqrt_series(id, "a_n = e^(sqrt n)", false, 0, rat(0, 1), 1),
        "ex5_6" => exp_sqrt_series(id, "a_n = (-1)^n e^(sqrt n)", true, 0, rat(0, 1), 1),
        "ex5_7" => tel(
            fam(T1, 0, shifted),
            "a_n = e^(-0.2n + sqrt n) - e^(-0.2(n-1) + sqrt(n-1))",
        ),
        "ex5_8" => tel(
            fam(T2, 0, shifted),
            "a_n = (-1)^n (e^(-0.2n + sqrt n) + e^(-0.2(n-1) + sqrt(n-1)))",
        ),
        "ex5_9" => exp_sqrt_series(id, "a_n = e^(-0.2n + sqrt n)", false, 0, rat(-1, 5), 1),
        "ex5_10" => exp_sqrt_series(id, "a_n = (-1)^n e^(0.2n - sqrt n)", true, 0, rat(1, 5), -1),
        "ex5_11" => tel(
            fam(T1, 1, sqrt_term(-1)),
            "a_n = sqrt(n!) e^(-sqrt n) - sqrt((n-1)!) e^(-sqrt(n-1))",
        ),
        "ex5_12" => tel(
            fam(T2, 1, sqrt_term(-1)),
            "a_n = (-1)^n (sqrt(n!) e^(-sqrt n) + sqrt((n-1)!) e^(-sqrt(n-1)))",
        ),
        "ex5_13" => exp_sqrt_series(id, "a_n = (-1)^n sqrt(n!) e^(-sqrt n)", true, 1, rat(0, 1), -1),
        "ex5_14" => {
            let term: TermFn = Arc::new(|n, p| {
                let g = p.guarded();
                let nn = Real::from_u64(n, g);
                let e = Real::from_i64(3, g).sqrt();
                let v = &nn.pow(&e) / &(&Real::one(g) + &nn.sqrt());
                Complex::from_real(v.round_to(p))
            });
            SeriesProblem::new(id, 2, term)
                .expect("m = 2")
                .with_description("a_n = n^sqrt(3) / (1 + sqrt n)")
        }
        "ex7_1" => {
            let v: TermFn = Arc::new(|n, p| {
                let d = 4 * (n as i64) * (n as i64);
                Complex::from_real(Real::from_ratio(-1, d, p))
            });
            let pp = ProductProblem::new(id, v, 1, 2)?.with_known_s(Arc::new(|p| {
                let g = p.guarded();
                Complex::from_real((&Real::from_i64(2, g) / &Real::pi(g)).round_to(p))
            }));
            let mut s = product_to_series(&pp)
                .with_description("A_n = prod_{k<=n} (1 - 1/(4k^2)), limit 2/pi");
            s.relative_errors = true;
            s
        }
        "ex7_2" => {
            let v: TermFn = Arc::new(|n, p| {
                let g = p.guarded();
                let x = Real::from_u64(n, g);
                Complex::from_real((&x * &x.sqrt()).recip().round_to(p))
            });
            let pp = ProductProblem::new(id, v, 2, 3)?;
            product_to_series(&pp).with_description("A_n = prod_{k<=n} (1 + k^(-3/2))")
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::roundoff_unit;
    use proptest::prelude::*;

    const Q: Precision = Precision::QUAD;

    fn close(a: &Real, b: f64, rel: f64) -> bool {
        ((a.to_f64() - b) / b).abs() < rel
    }

    #[test]
    fn first_partial_sum_of_ex5_1() {
        let s = partial_sums(&builtin("ex5_1").unwrap(), 5, Q).unwrap();
        let a1 = (-1f64).exp() - 1.0;
        assert!(close(&s[0].re, a1, 1e-15));
        let err = (&s[0].re + &Real::one(Q)).abs();
        assert!(close(&err, 0.368, 2e-3));
    }

    #[test]
    fn zero_series_has_zero_sums() {
        let zero: TermFn = Arc::new(|_, p| Complex::zero(p));
        let p = SeriesProblem::new("zero", 1, zero).unwrap();
        assert!(partial_sums(&p, 10, Q).unwrap().iter().all(Complex::is_zero));
        assert!(partial_sums(&p, 0, Q).is_err());
    }

    #[test]
    fn fifth_partial_sum_of_ex5_5() {
        let s = partial_sums(&builtin("ex5_5").unwrap(), 5, Q).unwrap();
        let direct: f64 = (1..=5).map(|k| (k as f64).sqrt().exp()).sum();
        assert!(close(&s[4].re, direct, 1e-14));
        assert_eq!(s[4].re.to_sci(3), "2.92e+01");
    }

    #[test]
    fn family_captions() {
        let p = Q;
        let ex1 = builtin("ex5_1").unwrap().samples(10, p).unwrap();
        let ex4 = builtin("ex5_4").unwrap().samples(10, p).unwrap();
        let ex11 = builtin("ex5_11").unwrap().samples(10, p).unwrap();
        for n in 1..=10u64 {
            let x = n as f64;
            let y = (n - 1) as f64;
            let e1 = (-x.sqrt()).exp() - (-y.sqrt()).exp();
            assert!(close(&ex1.term(n).re, e1, 1e-13), "ex5_1 n={n}");
            let sgn = if n % 2 == 1 { -1.0 } else { 1.0 };
            let e4 = sgn * (x.sqrt().exp() + y.sqrt().exp());
            assert!(close(&ex4.term(n).re, e4, 1e-14), "ex5_4 n={n}");
            let fact = |k: u64| (1..=k).product::<u64>() as f64;
            let e11 = fact(n).sqrt() * (-x.sqrt()).exp() - fact(n - 1).sqrt() * (-y.sqrt()).exp();
            assert!(close(&ex11.term(n).re, e11, 1e-12), "ex5_11 n={n}");
        }
    }

    #[test]
    fn telescoping_identity_holds_within_accumulation_bound() {
        let u = roundoff_unit(&Q);
        for id in ["ex5_1", "ex5_2", "ex5_3", "ex5_4", "ex5_7", "ex5_8", "ex5_11", "ex5_12"] {
            let problem = builtin(id).unwrap();
            let fam = problem.family.clone().unwrap().family;
            let s = problem.samples(200, Q).unwrap();
            let mut max_abs = Real::zero(Q);
            for n in 1..=200u64 {
                max_abs = max_abs.max(s.sum(n).re.abs());
                let closed = fam.closed_form_sum(n, Q);
                let bound = &(&max_abs * &u) * &Real::from_u64(8 * n, Q);
                let diff = (&s.sum(n).re - &closed).abs();
                assert!(diff <= bound, "{id} n={n}: {diff:?} > {bound:?}");
            }
        }
    }

    #[test]
    fn predicted_structure() {
        let f = |id: &str| builtin(id).unwrap().family.unwrap();
        assert_eq!(f("ex5_1").sigma, rat(1, 2));
        assert_eq!(f("ex5_1").gamma, rat(-1, 2));
        assert_eq!(f("ex5_2").sigma, rat(0, 1));
        assert_eq!(f("ex5_7").sigma, rat(0, 1));
        assert_eq!(f("ex5_7").gamma, rat(0, 1));
        assert_eq!(f("ex5_11").sigma, rat(-1, 2));
        assert_eq!(f("ex5_11").gamma, rat(0, 1));
        let neg = TelescopingFamily::new(TelescopingType::Difference, -1, 2, sqrt_term(-1)).unwrap();
        assert_eq!(neg.predicted_sigma(), rat(0, 1));
        assert_eq!(neg.predicted_gamma(), rat(1, 2));
    }

    #[test]
    fn product_adapter() {
        let ex71 = builtin("ex7_1").unwrap();
        let s = ex71.samples(4, Q).unwrap();
        assert_eq!(s.sum(1).re.to_f64(), 0.75);
        let s_known = ex71.known_s(Q).unwrap();
        assert!(close(&s_known.re, 2.0 / std::f64::consts::PI, 1e-15));

        let ex72 = builtin("ex7_2").unwrap();
        let s = ex72.samples(5, Q).unwrap();
        assert_eq!(s.term(1).re.to_f64(), 2.0);
        assert_eq!(s.sum(5).re.to_sci(3), "3.96e+00");

        let zero: TermFn = Arc::new(|_, p| Complex::zero(p));
        let pp = ProductProblem::new("empty", zero, 1, 2).unwrap();
        let s = product_to_series(&pp).samples(6, Q).unwrap();
        assert_eq!(s.term(1).re.to_f64(), 1.0);
        for n in 2..=6 {
            assert!(s.term(n).is_zero());
            assert_eq!(s.sum(n).re.to_f64(), 1.0);
        }
    }

    #[test]
    fn product_rejects_slow_decay_and_zero_factors() {
        let v: TermFn = Arc::new(|_, p| Complex::zero(p));
        assert!(ProductProblem::new("x", v.clone(), 2, 2).is_err());
        let minus_one: TermFn = Arc::new(|n, p| {
            if n == 2 {
                Complex::from_real(-Real::one(p))
            } else {
                Complex::zero(p)
            }
        });
        let pp = ProductProblem::new("x", minus_one, 1, 2).unwrap();
        let err = product_to_series(&pp).samples(5, Q).unwrap_err();
        assert_eq!(err, Error::ZeroPartialProduct { n: 2 });
    }

    #[test]
    fn product_sums_match_direct_products() {
        let u = roundoff_unit(&Q);
        for id in ["ex7_1", "ex7_2"] {
            let problem = builtin(id).unwrap();
            let s = problem.samples(300, Q).unwrap();
            let TermSource::Product(v) = problem.source() else { panic!() };
            let mut prod = Real::one(Q);
            for n in 1..=300u64 {
                prod = &prod * &(&Real::one(Q) + &v(n, Q).re);
                let bound = &(&prod.abs() * &u) * &Real::from_u64(4 * n, Q);
                assert!((&s.sum(n).re - &prod).abs() <= bound, "{id} n={n}");
            }
        }
    }

    #[test]
    fn overflow_is_reported_with_index() {
        let huge: TermFn = Arc::new(|n, p| Complex::from_real(Real::from_i64(10, p).powi(200 * n as i32)));
        let problem = SeriesProblem::new("huge", 1, huge).unwrap();
        let err = problem.samples(5, Precision::DOUBLE).unwrap_err();
        assert_eq!(err, Error::Overflow { n: 2 });
        assert!(problem.samples(5, Q).is_ok());
    }

    #[test]
    fn sigma_hat_validation() {
        let p = builtin("ex5_1").unwrap();
        assert!(p.clone().with_sigma_hat(rat(1, 2)).is_ok());
        assert!(p.clone().with_sigma_hat(rat(-3, 2)).is_ok());
        assert!(p.clone().with_sigma_hat(rat(1, 3)).is_err());
        assert!(p.with_sigma_hat(rat(3, 2)).is_err());
    }

    #[test]
    fn trig_pair_conjugates() {
        let h: TermFn = Arc::new(|n, p| {
            let x = Real::from_u64(n, p);
            Complex::from_real((&x * &x).recip())
        });
        let pair = trig_series_pair(
            "cos",
            h.clone(),
            true,
            FracPoly::zero(2),
            FracPoly::new(2, vec![rat(0, 1), rat(1, 1)]).unwrap(),
            0,
            2,
        )
        .unwrap();
        let a = pair.plus.samples(30, Q).unwrap();
        let b = pair.minus.samples(30, Q).unwrap();
        for n in 1..=30 {
            assert_eq!(a.term(n), b.term(n).conj());
            let x = n as f64;
            assert!(close(&a.term(n).re, x.sqrt().cos() / (x * x), 1e-14));
        }
        let flat = trig_series_pair("flat", h, true, FracPoly::zero(2), FracPoly::zero(2), 0, 2).unwrap();
        let a = flat.plus.samples(10, Q).unwrap();
        let b = flat.minus.samples(10, Q).unwrap();
        for n in 1..=10 {
            assert_eq!(a.term(n), b.term(n));
            assert!(a.term(n).im.is_zero());
        }
        assert!(FracPoly::new(2, vec![rat(1, 1); 4]).is_err());
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(builtin("ex9_9").unwrap_err(), Error::UnknownProblem("ex9_9".into()));
        for id in builtin_ids() {
            assert!(builtin(id).is_ok(), "{id}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn generators_are_deterministic(idx in 0usize..16, n in 1u64..60) {
            let problem = builtin(builtin_ids()[idx]).unwrap();
            let a = problem.samples(n, Q).unwrap();
            let b = problem.samples(n, Q).unwrap();
            prop_assert_eq!(a.term(n), b.term(n));
            prop_assert_eq!(a.sum(n), b.sum(n));
        }

        #[test]
        fn extend_matches_fresh_generation(idx in 0usize..16, k in 1u64..30, extra in 1u64..30) {
            let problem = builtin(builtin_ids()[idx]).unwrap();
            let mut a = problem.samples(k, Q).unwrap();
            a.extend_to(&problem, k + extra).unwrap();
            let b = problem.samples(k + extra, Q).unwrap();
            prop_assert_eq!(a.sum(k + extra), b.sum(k + extra));
        }
    }
}
