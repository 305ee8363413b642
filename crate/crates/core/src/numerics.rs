//! Scalar arithmetic at an explicit, configurable precision.
//!
//! [`Real`] wraps an MPFR float whose mantissa width comes from a
//! [`Precision`]; every constructor takes the precision explicitly and binary
//! operations produce a result at the wider of the two operand precisions.
//! [`Complex`] is a plain `(re, im)` pair of [`Real`]s.
//!
//! MPFR itself has an effectively unbounded exponent, so the decimal exponent
//! range of a preset is enforced by [`Precision::contains`] at the points where
//! overflow matters (partial sums and the extrapolation recursion).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use rug::float::Round;
use rug::ops::Pow;
use rug::Float;

pub use rug::Rational;

use crate::error::{Error, Result};

/// Extra mantissa bits used for intermediate evaluation of elementary
/// functions before rounding back to the working precision.
pub const GUARD_BITS: u32 = 64;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision: mantissa width and the supported decimal exponent range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Precision {
    mantissa_bits: u32,
    min_exp10: i32,
    max_exp10: i32,
}

impl Precision {
    /// IEEE binary64.
    pub const DOUBLE: Precision = Precision {
        mantissa_bits: 53,
        min_exp10: -307,
        max_exp10: 308,
    };

    /// IEEE binary128-equivalent: 113-bit mantissa, roundoff unit 1.93e-34.
    pub const QUAD: Precision = Precision {
        mantissa_bits: 113,
        min_exp10: -4931,
        max_exp10: 4932,
    };

    pub fn new(mantissa_bits: u32, min_exp10: i32, max_exp10: i32) -> Result<Precision> {
        if mantissa_bits < 53 {
            return Err(Error::InvalidPrecision(format!(
                "mantissa_bits must be at least 53, got {mantissa_bits}"
            )));
        }
        if mantissa_bits > 1 << 20 {
            return Err(Error::InvalidPrecision(format!(
                "mantissa_bits {mantissa_bits} is unreasonably large"
            )));
        }
        if min_exp10 >= 0 || max_exp10 <= 0 {
            return Err(Error::InvalidPrecision(format!(
                "exponent range [{min_exp10}, {max_exp10}] must straddle zero"
            )));
        }
        Ok(Precision {
            mantissa_bits,
            min_exp10,
            max_exp10,
        })
    }

    /// Looks up a named preset (`double` or `quad`).
    pub fn preset(name: &str) -> Result<Precision> {
        match name.to_ascii_lowercase().as_str() {
            "double" | "f64" | "binary64" => Ok(Precision::DOUBLE),
            "quad" | "f128" | "binary128" => Ok(Precision::QUAD),
            other => Err(Error::InvalidPrecision(format!(
                "unknown precision preset '{other}' (expected double or quad)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Precision::DOUBLE => "double".to_string(),
            Precision::QUAD => "quad".to_string(),
            p => format!("{}-bit", p.mantissa_bits),
        }
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn min_exp10(&self) -> i32 {
        self.min_exp10
    }

    pub fn max_exp10(&self) -> i32 {
        self.max_exp10
    }

    /// Same exponent range, `extra` more mantissa bits.
    pub fn widened(&self, extra: u32) -> Precision {
        Precision {
            mantissa_bits: self.mantissa_bits + extra,
            ..*self
        }
    }

    /// Precision used for guarded intermediate evaluation.
    pub fn guarded(&self) -> Precision {
        self.widened(GUARD_BITS)
    }

    /// Spacing of representable numbers just above one: `2^(1 - mantissa_bits)`.
    pub fn roundoff_unit(&self) -> Real {
        roundoff_unit(self)
    }

    /// Number of significant decimal digits needed to print a value at this
    /// precision without losing information.
    pub fn decimal_digits(&self) -> usize {
        (self.mantissa_bits as f64 / LOG2_10).ceil() as usize + 2
    }

    /// True when `x` is finite and its magnitude lies below the largest
    /// representable value of the preset. Values that would underflow are
    /// accepted; they are flushed only by the arithmetic that produced them.
    pub fn contains(&self, x: &Real) -> bool {
        if !x.0.is_finite() {
            return false;
        }
        match x.0.get_exp() {
            None => true,
            Some(e) => (e as f64 - 1.0) < self.max_exp10 as f64 * LOG2_10,
        }
    }
}

/// `2^(1 - mantissa_bits)` at the given precision.
pub fn roundoff_unit(p: &Precision) -> Real {
    roundoff_unit_for_bits(p.mantissa_bits, *p)
}

/// `2^(1 - mantissa_bits)` for an arbitrary mantissa width, represented at
/// precision `at`. Powers of two are exact at any precision.
pub fn roundoff_unit_for_bits(mantissa_bits: u32, at: Precision) -> Real {
    Real(Float::with_val(
        at.mantissa_bits,
        Float::i_exp(1, 1 - mantissa_bits as i32),
    ))
}

/// `(s/m) ln(n!)` evaluated through ln-gamma. Exactly zero when `n <= 1` or
/// `s == 0`.
pub fn ln_factorial_frac(n: u64, s: i64, m: u32, p: Precision) -> Real {
    if n <= 1 || s == 0 {
        return Real::zero(p);
    }
    let g = p.guarded().mantissa_bits;
    let lg = Float::with_val(g, n + 1).ln_gamma();
    let scaled = lg * Float::with_val(g, s) / Float::with_val(g, m);
    Real(Float::with_val(p.mantissa_bits, scaled))
}

/// `(n!)^(s/m)` computed in the log domain at guard precision and rounded once.
pub fn factorial_power(n: u64, s: i64, m: u32, p: Precision) -> Real {
    ln_factorial_frac(n, s, m, p.guarded())
        .exp()
        .round_to(p)
}

/// Real floating value at an explicit precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn zero(p: Precision) -> Real {
        Real(Float::new(p.mantissa_bits))
    }

    pub fn one(p: Precision) -> Real {
        Real::from_i64(1, p)
    }

    pub fn from_i64(v: i64, p: Precision) -> Real {
        Real(Float::with_val(p.mantissa_bits, v))
    }

    pub fn from_u64(v: u64, p: Precision) -> Real {
        Real(Float::with_val(p.mantissa_bits, v))
    }

    pub fn from_f64(v: f64, p: Precision) -> Real {
        Real(Float::with_val(p.mantissa_bits, v))
    }

    pub fn from_rational(v: &Rational, p: Precision) -> Real {
        Real(Float::with_val(p.mantissa_bits, v))
    }

    /// `num/den`, correctly rounded.
    pub fn from_ratio(num: i64, den: i64, p: Precision) -> Real {
        Real::from_rational(&Rational::from((num, den)), p)
    }

    /// Parses a decimal literal (`-0.2`, `1.5e3`, `7`), correctly rounded.
    pub fn parse(text: &str, p: Precision) -> Result<Real> {
        let t = normalize_exponent_marker(text.trim());
        let parsed =
            Float::parse(&t).map_err(|e| Error::Parse(format!("invalid number '{text}': {e}")))?;
        Ok(Real(Float::with_val(p.mantissa_bits, parsed)))
    }

    pub fn pi(p: Precision) -> Real {
        Real(Float::with_val(p.mantissa_bits, rug::float::Constant::Pi))
    }

    /// Wraps an existing MPFR value (keeps its precision).
    pub fn from_float(f: Float) -> Real {
        Real(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec_bits(&self) -> u32 {
        self.0.prec()
    }

    /// Rounds (or widens) to precision `p`.
    pub fn round_to(&self, p: Precision) -> Real {
        Real(Float::with_val(p.mantissa_bits, &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn binary_exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    pub fn abs(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.abs_ref()))
    }

    pub fn recip(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.recip_ref()))
    }

    pub fn sqrt(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.sqrt_ref()))
    }

    /// Real `k`-th root.
    pub fn root(&self, k: u32) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.root_ref(k)))
    }

    pub fn exp(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.ln_ref()))
    }

    pub fn sin(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.sin_ref()))
    }

    pub fn cos(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.cos_ref()))
    }

    pub fn ln_gamma(&self) -> Real {
        Real(Float::with_val(self.0.prec(), self.0.ln_gamma_ref()))
    }

    pub fn pow(&self, exponent: &Real) -> Real {
        let p = self.0.prec().max(exponent.0.prec());
        Real(Float::with_val(p, (&self.0).pow(&exponent.0)))
    }

    pub fn powi(&self, exponent: i32) -> Real {
        Real(Float::with_val(self.0.prec(), (&self.0).pow(exponent)))
    }

    pub fn hypot(&self, other: &Real) -> Real {
        let p = self.0.prec().max(other.0.prec());
        Real(Float::with_val(p, self.0.hypot_ref(&other.0)))
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i32) -> Real {
        let mut f = self.0.clone();
        f <<= k;
        Real(f)
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `u^p` for a non-negative integer base and rational exponent, with
    /// integer exponents evaluated exactly when possible.
    pub fn int_pow_rational(base: u64, exponent: &Rational, p: Precision) -> Real {
        if exponent.is_zero() {
            return Real::one(p);
        }
        if *exponent.denom() == 1 {
            if let Some(e) = exponent.numer().to_i32() {
                return Real(Float::with_val(
                    p.mantissa_bits,
                    Float::with_val(p.guarded().mantissa_bits, base).pow(e),
                ));
            }
        }
        let g = p.guarded();
        let lnb = Real::from_u64(base, g).ln();
        let e = Real::from_rational(exponent, g);
        (&lnb * &e).exp().round_to(p)
    }

    /// Scientific notation with `sig` significant digits, e.g. `3.68e-1`
    /// style but with a signed two-digit-minimum exponent (`3.68e-01`).
    pub fn to_sci(&self, sig: usize) -> String {
        format_sci(&self.0, sig)
    }

    /// All significant digits of the working precision.
    pub fn to_full(&self) -> String {
        let digits = (self.0.prec() as f64 / LOG2_10).floor() as usize + 2;
        format_sci(&self.0, digits)
    }

    pub fn total_cmp(&self, other: &Real) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

fn normalize_exponent_marker(text: &str) -> String {
    // Fortran-style "1.5D+03" as printed in published tables.
    text.replace(['D', 'd'], "e")
}

fn format_sci(f: &Float, sig: usize) -> String {
    if f.is_nan() {
        return "NaN".into();
    }
    if f.is_infinite() {
        return if f.is_sign_negative() { "-inf" } else { "inf" }.into();
    }
    let sig = sig.max(1);
    if f.is_zero() {
        let mut s = String::from("0.");
        s.push_str(&"0".repeat(sig.saturating_sub(1)));
        s.push_str("e+00");
        return s;
    }
    let (neg, digits, exp) = f.to_sign_string_exp_round(10, Some(sig), Round::Nearest);
    let exp = exp.unwrap_or(0) - 1;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&digits[..1]);
    if digits.len() > 1 {
        out.push('.');
        out.push_str(&digits[1..]);
    }
    out.push('e');
    out.push(if exp < 0 { '-' } else { '+' });
    out.push_str(&format!("{:02}", exp.abs()));
    out
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_full())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{}", self.to_sci(d + 1)),
            None => write!(f, "{}", self.to_full()),
        }
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.0.prec().max(rhs.0.prec());
                Real(Float::with_val(p, &self.0 $op &rhs.0))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                &self $op &rhs
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                &self $op rhs
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self $op &rhs
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.0.prec(), -&self.0))
    }
}

/// Complex value as a pair of [`Real`]s.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Complex {
        Complex { re, im }
    }

    pub fn from_real(re: Real) -> Complex {
        let p = re.prec_bits();
        Complex {
            re,
            im: Real(Float::new(p)),
        }
    }

    pub fn zero(p: Precision) -> Complex {
        Complex::from_real(Real::zero(p))
    }

    pub fn one(p: Precision) -> Complex {
        Complex::from_real(Real::one(p))
    }

    pub fn i(p: Precision) -> Complex {
        Complex::new(Real::zero(p), Real::one(p))
    }

    pub fn from_f64(re: f64, im: f64, p: Precision) -> Complex {
        Complex::new(Real::from_f64(re, p), Real::from_f64(im, p))
    }

    /// Parses `x`, `yi`, `x+yi`, `x-yi` (also `j` for the imaginary unit).
    pub fn parse(text: &str, p: Precision) -> Result<Complex> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("invalid complex number '{text}'"));
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix(['i', 'j']) else {
            return Ok(Complex::from_real(Real::parse(&t, p)?));
        };
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-')
                && !matches!(bytes[k - 1], b'e' | b'E' | b'd' | b'D')
            {
                split = Some(k);
                break;
            }
        }
        let imag_of = |s: &str| -> Result<Real> {
            match s {
                "" | "+" => Ok(Real::one(p)),
                "-" => Ok(-Real::one(p)),
                s => Real::parse(s, p),
            }
        };
        match split {
            Some(k) => Ok(Complex::new(
                Real::parse(&body[..k], p).map_err(|_| bad())?,
                imag_of(&body[k..]).map_err(|_| bad())?,
            )),
            None => Ok(Complex::new(Real::zero(p), imag_of(body).map_err(|_| bad())?)),
        }
    }

    pub fn prec_bits(&self) -> u32 {
        self.re.prec_bits().max(self.im.prec_bits())
    }

    pub fn round_to(&self, p: Precision) -> Complex {
        Complex::new(self.re.round_to(p), self.im.round_to(p))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn abs(&self) -> Real {
        if self.im.is_zero() {
            self.re.abs()
        } else {
            self.re.hypot(&self.im)
        }
    }

    pub fn conj(&self) -> Complex {
        Complex::new(self.re.clone(), -&self.im)
    }

    /// Principal argument in `(-pi, pi]`.
    pub fn arg(&self) -> Real {
        let p = self.prec_bits();
        Real(Float::with_val(p, self.im.0.atan2_ref(&self.re.0)))
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Complex {
        Complex::new(self.abs().ln(), self.arg())
    }

    pub fn exp(&self) -> Complex {
        let r = self.re.exp();
        if self.im.is_zero() {
            let p = r.prec_bits();
            return Complex::new(r, Real(Float::new(p)));
        }
        Complex::new(&r * &self.im.cos(), &r * &self.im.sin())
    }

    pub fn scale(&self, k: &Real) -> Complex {
        Complex::new(&self.re * k, &self.im * k)
    }

    pub fn mul_i(&self) -> Complex {
        Complex::new(-&self.im, self.re.clone())
    }

    pub fn recip(&self) -> Complex {
        if self.im.is_zero() {
            return Complex::from_real(self.re.recip());
        }
        let d = &(&self.re * &self.re) + &(&self.im * &self.im);
        Complex::new(&self.re / &d, -(&self.im / &d))
    }

    pub fn powi(&self, k: u32) -> Complex {
        let p = self.prec_bits();
        let mut acc = Complex::from_real(Real(Float::with_val(p, 1)));
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Short human-readable rendering (real part only when purely real).
    pub fn to_sci(&self, sig: usize) -> String {
        if self.im.is_zero() {
            self.re.to_sci(sig)
        } else {
            let im = self.im.to_sci(sig);
            let sep = if im.starts_with('-') { "" } else { "+" };
            format!("{}{}{}i", self.re.to_sci(sig), sep, im)
        }
    }

    pub fn to_full(&self) -> String {
        if self.im.is_zero() {
            self.re.to_full()
        } else {
            let im = self.im.to_full();
            let sep = if im.starts_with('-') { "" } else { "+" };
            format!("{}{}{}i", self.re.to_full(), sep, im)
        }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_full())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{}", self.to_sci(d + 1)),
            None => write!(f, "{}", self.to_full()),
        }
    }
}

impl From<Real> for Complex {
    fn from(re: Real) -> Complex {
        Complex::from_real(re)
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        if self.im.is_zero() && rhs.im.is_zero() {
            let re = &self.re * &rhs.re;
            let p = re.prec_bits();
            return Complex::new(re, Real(Float::new(p)));
        }
        Complex::new(
            &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        if rhs.im.is_zero() {
            return Complex::new(&self.re / &rhs.re, &self.im / &rhs.re);
        }
        // Smith's algorithm.
        if rhs.re.abs() >= rhs.im.abs() {
            let r = &rhs.im / &rhs.re;
            let d = &rhs.re + &(&rhs.im * &r);
            Complex::new(
                &(&self.re + &(&self.im * &r)) / &d,
                &(&self.im - &(&self.re * &r)) / &d,
            )
        } else {
            let r = &rhs.re / &rhs.im;
            let d = &rhs.im + &(&rhs.re * &r);
            Complex::new(
                &(&(&self.re * &r) + &self.im) / &d,
                &(&(&self.im * &r) - &self.re) / &d,
            )
        }
    }
}

macro_rules! complex_owned_ops {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                &self $op &rhs
            }
        }
        impl $tr<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                &self $op rhs
            }
        }
        impl $tr<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                self $op &rhs
            }
        }
    };
}

complex_owned_ops!(Add, add, +);
complex_owned_ops!(Sub, sub, -);
complex_owned_ops!(Mul, mul, *);
complex_owned_ops!(Div, div, /);

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

/// Parses a decimal or fraction literal (`1.3`, `-0.2`, `5`, `3/2`, `1e-3`)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("invalid rational literal '{text}'"));
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = rug::Integer::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = rug::Integer::from(10);
    let mut r = Rational::from(numer);
    if scale >= 0 {
        r *= Rational::from(ten.pow(scale as u32));
    } else {
        r /= Rational::from(ten.pow((-scale) as u32));
    }
    if neg {
        r = -r;
    }
    Ok(r)
}
