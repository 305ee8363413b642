//! `sum cos(sqrt n)/n^2` from the accelerated trig pair against a reference
//! built from direct summation and an Euler-Maclaurin tail.

use std::sync::Arc;

use fracsum::numerics::{Complex, Precision, Rational, Real};
use fracsum::sampling::Schedule;
use fracsum::series_model::{trig_series_pair, FracPoly, TermFn};
use fracsum::transform::sum_trig;

const TAYLOR: usize = 24;

fn wide() -> Precision {
    Precision::new(320, -4931, 4932).unwrap()
}

fn mul(a: &[Real], b: &[Real], p: Precision) -> Vec<Real> {
    let mut out = vec![Real::zero(p); TAYLOR];
    for i in 0..TAYLOR {
        for j in 0..TAYLOR - i {
            out[i + j] = &out[i + j] + &(&a[i] * &b[j]);
        }
    }
    out
}

/// Coefficients of `(1 + h/N)^e` in powers of `h`.
fn binomial_series(e: &Real, big_n: &Real, p: Precision) -> Vec<Real> {
    let mut out = vec![Real::one(p)];
    for k in 1..TAYLOR {
        let k_real = Real::from_u64(k as u64, p);
        let factor = &(e - &Real::from_u64(k as u64 - 1, p)) / &(&k_real * big_n);
        out.push(&out[k - 1] * &factor);
    }
    out
}

/// Taylor coefficients `f^(k)(N)/k!` of `f(x) = cos(sqrt x)/x^2`.
fn taylor(big_n: u64, p: Precision) -> Vec<Real> {
    let nn = Real::from_u64(big_n, p);
    let root = nn.sqrt();
    let mut shift = binomial_series(&Real::from_ratio(1, 2, p), &nn, p);
    for c in shift.iter_mut() {
        *c = &*c * &root;
    }
    // s(h) = sqrt(N + h) - sqrt(N), no constant term.
    shift[0] = Real::zero(p);
    let mut cos_s = vec![Real::zero(p); TAYLOR];
    let mut sin_s = vec![Real::zero(p); TAYLOR];
    let mut power = vec![Real::zero(p); TAYLOR];
    power[0] = Real::one(p);
    let mut factorial = Real::one(p);
    for k in 0..TAYLOR {
        if k > 0 {
            power = mul(&power, &shift, p);
            factorial = &factorial * &Real::from_u64(k as u64, p);
        }
        let sign = if (k / 2) % 2 == 0 { Real::one(p) } else { -Real::one(p) };
        let target = if k % 2 == 0 { &mut cos_s } else { &mut sin_s };
        for i in 0..TAYLOR {
            target[i] = &target[i] + &(&(&power[i] * &sign) / &factorial);
        }
    }
    let (c, s) = (root.cos(), root.sin());
    let cos_part: Vec<Real> = (0..TAYLOR)
        .map(|i| &(&c * &cos_s[i]) - &(&s * &sin_s[i]))
        .collect();
    let mut inv_sq = binomial_series(&Real::from_i64(-2, p), &nn, p);
    let scale = (&nn * &nn).recip();
    for v in inv_sq.iter_mut() {
        *v = &*v * &scale;
    }
    mul(&cos_part, &inv_sq, p)
}

/// `int_N^inf cos(sqrt x)/x^2 dx = 2 Re int_T^inf e^(it) t^(-3) dt` with
/// `T = sqrt N`, from the asymptotic series `i e^(iT) sum_k (-i)^k (3)_k T^(-3-k)`.
fn integral_tail(big_n: u64, p: Precision) -> Real {
    let t = Real::from_u64(big_n, p).sqrt();
    let mut acc = Complex::zero(p);
    let mut term = Complex::from_real(t.powi(-3));
    let minus_i = Complex::new(Real::zero(p), -Real::one(p));
    for k in 0..60u64 {
        acc = &acc + &term;
        let factor = &Real::from_u64(3 + k, p) / &t;
        term = (&term * &minus_i).scale(&factor);
    }
    let e = Complex::new(t.cos(), t.sin());
    let v = &(&Complex::i(p) * &e) * &acc;
    &v.re * &Real::from_i64(2, p)
}

fn reference() -> Real {
    let p = wide();
    let big_n = 10_000u64;
    let mut direct = Real::zero(p);
    for n in 1..big_n {
        let x = Real::from_u64(n, p);
        direct = &direct + &(&x.sqrt().cos() / &(&x * &x));
    }
    let c = taylor(big_n, p);
    let bernoulli = [
        (1i64, 6i64),
        (-1, 30),
        (1, 42),
        (-1, 30),
        (5, 66),
        (-691, 2730),
        (7, 6),
        (-3617, 510),
        (43867, 798),
        (-174611, 330),
    ];
    // sum_{n>=N} f(n) = int_N^inf f + f(N)/2 - sum_k B_2k/(2k)! f^(2k-1)(N)
    let mut tail = &integral_tail(big_n, p) + &(&c[0] / &Real::from_i64(2, p));
    for (k, (num, den)) in bernoulli.iter().enumerate() {
        let two_k = 2 * (k as i64 + 1);
        let b = Real::from_rational(&Rational::from((*num, den * two_k)), p);
        tail = &tail - &(&b * &c[two_k as usize - 1]);
    }
    &direct + &tail
}

#[test]
fn cosine_sum_matches_reference() {
    let q = Precision::QUAD;
    let h: TermFn = Arc::new(|n, p| {
        let x = Real::from_u64(n, p);
        Complex::from_real((&x * &x).recip())
    });
    let zero = FracPoly::zero(2);
    let phase = FracPoly::new(2, vec![Rational::from(0), Rational::from(1), Rational::from(0)]).unwrap();
    let pair = trig_series_pair("cos_sqrt", h, true, zero, phase, 0, 2).unwrap();
    let sums = sum_trig(&pair, &Schedule::gps_str("1.3").unwrap(), 32, q).unwrap();
    let reference = reference();
    let diff = (&sums.cosine.re - &reference.round_to(q)).abs().to_f64();
    assert!(diff <= 1e-20, "difference {diff:e}, reference {}", reference.to_sci(30));
}

#[test]
fn reference_tail_is_consistent() {
    // Moving the split point must not change the reference beyond its own error.
    let p = wide();
    let a = {
        let mut direct = Real::zero(p);
        for n in 1..5000u64 {
            let x = Real::from_u64(n, p);
            direct = &direct + &(&x.sqrt().cos() / &(&x * &x));
        }
        let c = taylor(5000, p);
        let mut tail = &integral_tail(5000, p) + &(&c[0] / &Real::from_i64(2, p));
        let b = [(1i64, 6i64), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730)];
        for (k, (num, den)) in b.iter().enumerate() {
            let two_k = 2 * (k as i64 + 1);
            let bk = Real::from_rational(&Rational::from((*num, den * two_k)), p);
            tail = &tail - &(&bk * &c[two_k as usize - 1]);
        }
        &direct + &tail
    };
    let diff = (&a - &reference()).abs().to_f64();
    assert!(diff < 1e-30, "{diff:e}");
}
