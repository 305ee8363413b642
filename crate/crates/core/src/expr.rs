//! Small expression language for user supplied terms `a_n`.
//!
//! Grammar: numbers, `n`, `i`, `pi`, `e`, the operators `+ - * / ^`, and the
//! functions `sqrt exp ln log sin cos abs lgamma fact`. `fact(x)` is `Γ(x+1)`
//! and accepts real arguments. `^` is right associative and binds tighter
//! than unary minus, so `-n^2` is `-(n^2)`.

use std::sync::Arc;

use rug::Rational;

use crate::error::{Error, Result};
use crate::numerics::{parse_rational, Complex, Precision, Real};
use crate::series_model::TermFn;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    N,
    I,
    Pi,
    E,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
    LnGamma,
    Fact,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && matches!(chars[k], 'e' | 'E') {
                let mut j = k + 1;
                if j < chars.len() && matches!(chars[j], '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            out.push(Tok::Num(chars[start..k].iter().collect()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push(Tok::Ident(chars[start..k].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            k += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' in expression")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(s) => Ok(Expr::Num(parse_rational(&s)?)),
            Tok::Op('(') => {
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Tok::Op(c) => Err(Error::Parse(format!("unexpected '{c}'"))),
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "n" => return Ok(Expr::N),
                    "i" => return Ok(Expr::I),
                    "pi" => return Ok(Expr::Pi),
                    "e" => return Ok(Expr::E),
                    "sqrt" => Func::Sqrt,
                    "exp" => Func::Exp,
                    "ln" | "log" => Func::Ln,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "abs" => Func::Abs,
                    "lgamma" => Func::LnGamma,
                    "fact" => Func::Fact,
                    other => return Err(Error::Parse(format!("unknown identifier '{other}'"))),
                };
                if !self.eat('(') {
                    return Err(Error::Parse(format!("'{name}' needs an argument in parentheses")));
                }
                let arg = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut parser = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    let e = parser.sum()?;
    if parser.pos != parser.toks.len() {
        return Err(Error::Parse(format!("trailing input in '{src}'")));
    }
    Ok(e)
}

fn real_only(z: Complex, what: &str) -> Result<Real> {
    if !z.im.is_zero() {
        return Err(Error::Parse(format!("{what} needs a real argument")));
    }
    Ok(z.re)
}

impl Expr {
    fn integer_value(&self) -> Option<i64> {
        match self {
            Expr::Num(r) if r.denom() == &1 => r.numer().to_i64(),
            Expr::Neg(e) => e.integer_value().map(|v| -v),
            _ => None,
        }
    }

    /// Evaluates at `n` with working precision `p` (no extra guard bits).
    pub fn eval(&self, n: u64, p: Precision) -> Result<Complex> {
        Ok(match self {
            Expr::Num(r) => Complex::from_real(Real::from_rational(r, p)),
            Expr::N => Complex::from_real(Real::from_u64(n, p)),
            Expr::I => Complex::i(p),
            Expr::Pi => Complex::from_real(Real::pi(p)),
            Expr::E => Complex::from_real(Real::one(p).exp()),
            Expr::Neg(e) => -e.eval(n, p)?,
            Expr::Add(a, b) => &a.eval(n, p)? + &b.eval(n, p)?,
            Expr::Sub(a, b) => &a.eval(n, p)? - &b.eval(n, p)?,
            Expr::Mul(a, b) => &a.eval(n, p)? * &b.eval(n, p)?,
            Expr::Div(a, b) => {
                let d = b.eval(n, p)?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("division by zero at n = {n}")));
                }
                &a.eval(n, p)? / &d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(n, p)?;
                match b.integer_value() {
                    Some(k) if k.unsigned_abs() <= u32::MAX as u64 => {
                        let v = base.powi(k.unsigned_abs() as u32);
                        if k < 0 {
                            v.recip()
                        } else {
                            v
                        }
                    }
                    _ => {
                        let ex = b.eval(n, p)?;
                        if base.is_zero() {
                            Complex::zero(p)
                        } else if base.im.is_zero() && !base.re.is_sign_negative() && ex.im.is_zero() {
                            Complex::from_real(base.re.pow(&ex.re))
                        } else {
                            (&ex * &base.ln()).exp()
                        }
                    }
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(n, p)?;
                match f {
                    Func::Sqrt if x.im.is_zero() && !x.re.is_sign_negative() => Complex::from_real(x.re.sqrt()),
                    Func::Sqrt => {
                        let half = Complex::from_real(Real::from_ratio(1, 2, p));
                        (&half * &x.ln()).exp()
                    }
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x.is_zero() {
                            return Err(Error::Parse(format!("ln(0) at n = {n}")));
                        }
                        x.ln()
                    }
                    Func::Sin => {
                        let re = real_only(x, "sin")?;
                        Complex::from_real(re.sin())
                    }
                    Func::Cos => {
                        let re = real_only(x, "cos")?;
                        Complex::from_real(re.cos())
                    }
                    Func::Abs => Complex::from_real(x.abs()),
                    Func::LnGamma => Complex::from_real(real_only(x, "lgamma")?.ln_gamma()),
                    Func::Fact => {
                        let re = real_only(x, "fact")?;
                        Complex::from_real((&re + &Real::one(p)).ln_gamma().exp())
                    }
                }
            }
        })
    }

    /// Evaluates with guard bits and rounds to `p`.
    pub fn eval_rounded(&self, n: u64, p: Precision) -> Result<Complex> {
        Ok(self.eval(n, p.guarded())?.round_to(p))
    }

    /// Term function for a problem; evaluation errors become NaN, which the
    /// sampler reports as an overflow at that index.
    pub fn into_term_fn(self) -> TermFn {
        Arc::new(move |n, p| {
            self.eval_rounded(n, p).unwrap_or_else(|_| {
                let nan = Real::from_f64(f64::NAN, p);
                Complex::new(nan.clone(), nan)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Precision = Precision::QUAD;

    fn ev(src: &str, n: u64) -> f64 {
        parse(src).unwrap().eval_rounded(n, Q).unwrap().re.to_f64()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1 + 2*3", 0), 7.0);
        assert_eq!(ev("-n^2", 3), -9.0);
        assert_eq!(ev("2^3^2", 0), 512.0);
        assert_eq!(ev("n^-2", 4), 0.0625);
        assert_eq!(ev("(1+n)/2", 3), 2.0);
        assert_eq!(ev("1.5e1", 0), 15.0);
    }

    #[test]
    fn functions() {
        assert!((ev("exp(-sqrt(n))", 4) - (-2f64).exp()).abs() < 1e-16);
        assert!((ev("fact(n)", 5) - 120.0).abs() < 1e-12);
        assert!((ev("cos(sqrt(n))/n^2", 7) - 7f64.sqrt().cos() / 49.0).abs() < 1e-16);
        assert!((ev("n^(1/2)", 9) - 3.0).abs() < 1e-30);
        assert!((ev("ln(e)", 0) - 1.0).abs() < 1e-30);
    }

    #[test]
    fn complex_values() {
        let z = parse("(-1)^n * exp(i*pi*n/2)").unwrap().eval_rounded(1, Q).unwrap();
        assert!(z.re.abs() < 1e-30);
        assert!((z.im.to_f64() + 1.0).abs() < 1e-30);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "1 +", "foo(n)", "sqrt n", "(n", "n $ 2", "1 2"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        assert!(parse("1/(n-1)").unwrap().eval(1, Q).is_err());
    }
}
