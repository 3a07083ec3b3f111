//! Numeric backends: binary `f64` and exact `BigRational`.

use std::fmt::{Debug, Display};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Float64,
    ExactRational,
}

/// Field operations shared by both backends.
///
/// `EXACT` distinguishes the rational backend at compile time; generic code
/// uses it to choose between exact equality and tolerance checks.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const EXACT: bool;
    const BACKEND: Backend;

    fn from_int(n: i64) -> Self;
    fn from_bigint(n: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
    fn to_exact(&self) -> BigRational;
    fn from_exact(r: &BigRational) -> Self;
    /// Parses `"p/q"`, integers and decimal literals (with optional exponent).
    fn parse_text(s: &str) -> Option<Self>;
    /// Lossless text form: `"p/q"` for rationals, shortest round-trip for floats.
    fn to_text(&self) -> String;

    /// Solves a symmetric positive definite system.
    fn solve_spd(a: &[Vec<Self>], b: &[Self]) -> crate::Result<Vec<Self>>;

    /// Largest polynomial degree the backend accepts, if bounded.
    fn max_degree() -> Option<usize> {
        None
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn from_biguint(n: &BigUint) -> Self {
        Self::from_bigint(&BigInt::from(n.clone()))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: Backend = Backend::Float64;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_bigint(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> BigRational {
        simplest_rational(*self)
    }

    fn from_exact(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn parse_text(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.contains('/') {
            parse_exact(s).map(|r| rational_to_f64(&r))
        } else {
            s.parse::<f64>().ok().filter(|x| x.is_finite())
        }
    }

    fn to_text(&self) -> String {
        // Debug is shortest round-trip and switches to exponent form at the extremes
        format!("{:?}", self + 0.0)
    }

    fn solve_spd(a: &[Vec<Self>], b: &[Self]) -> crate::Result<Vec<Self>> {
        crate::linalg::solve_spd_f64(a, b)
    }

    fn max_degree() -> Option<usize> {
        Some(MAX_FLOAT_DEGREE)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const BACKEND: Backend = Backend::ExactRational;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_exact(&self) -> BigRational {
        self.clone()
    }

    fn from_exact(r: &BigRational) -> Self {
        r.clone()
    }

    fn parse_text(s: &str) -> Option<Self> {
        parse_exact(s)
    }

    fn solve_spd(a: &[Vec<Self>], b: &[Self]) -> crate::Result<Vec<Self>> {
        crate::linalg::solve_fraction_free(a, b)
    }

    fn to_text(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Degree cap for the float backend; binomials beyond it lose integer exactness.
pub const MAX_FLOAT_DEGREE: usize = 64;

pub fn rational_to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Row `n` of Pascal's triangle in the target backend.
pub fn binomial_row<T: Scalar>(n: usize) -> Vec<T> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    row.push(T::from_biguint(&c));
    for i in 0..n {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
        row.push(T::from_biguint(&c));
    }
    row
}

/// Exact value of a rational or decimal literal such as `"4/5"`, `"-0.2"`, `"1e-3"`.
pub fn parse_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_exact(num)?;
        let den = parse_exact(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&digits, 10).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let pow = BigRational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Some(if negative { -value } else { value })
}

/// The rational with smallest denominator that rounds to `x`.
///
/// Walks the continued-fraction convergents of the exact binary value of `x`
/// and stops at the first one whose nearest double is `x` itself, so `0.8`
/// maps to `4/5` rather than to its 53-bit dyadic expansion.
pub fn simplest_rational(x: f64) -> BigRational {
    let exact = match BigRational::from_float(x) {
        Some(r) => r,
        None => return BigRational::zero(),
    };
    if exact.is_integer() {
        return exact;
    }
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let candidate = BigRational::new(h.clone(), k.clone());
        if rational_to_f64(&candidate) == x {
            return candidate;
        }
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return exact;
        }
        rest = frac.recip();
    }
}

/// Least common multiple of the denominators in `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_bigint(&BigInt::from_usize(n).expect("usize fits in BigInt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_exact("0.8"), Some(q(4, 5)));
        assert_eq!(parse_exact("-0.2"), Some(q(-1, 5)));
        assert_eq!(parse_exact("4/5"), Some(q(4, 5)));
        assert_eq!(parse_exact("1.5e-2"), Some(q(3, 200)));
        assert_eq!(parse_exact("2E1"), Some(q(20, 1)));
        assert_eq!(parse_exact(".5"), Some(q(1, 2)));
        assert_eq!(parse_exact("1/0"), None);
        assert_eq!(parse_exact("abc"), None);
        assert_eq!(parse_exact("-"), None);
    }

    #[test]
    fn simplest_rational_recovers_short_fractions() {
        assert_eq!(simplest_rational(0.8), q(4, 5));
        assert_eq!(simplest_rational(-0.2), q(-1, 5));
        assert_eq!(simplest_rational(1.0 / 3.0), q(1, 3));
        assert_eq!(simplest_rational(0.5), q(1, 2));
        assert_eq!(simplest_rational(3.0), q(3, 1));
        let pi = simplest_rational(std::f64::consts::PI);
        assert_eq!(rational_to_f64(&pi), std::f64::consts::PI);
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(64, 32).to_string(), "1832624140942590534");
        assert_eq!(binomial(5, 7), BigUint::zero());
        let row: Vec<BigRational> = binomial_row(4);
        assert_eq!(row, vec![q(1, 1), q(4, 1), q(6, 1), q(4, 1), q(1, 1)]);
    }

    #[test]
    fn text_forms() {
        assert_eq!(q(4, 5).to_text(), "4/5");
        assert_eq!(q(-3, 1).to_text(), "-3");
        assert_eq!(0.8f64.to_text(), "0.8");
        assert_eq!(<f64 as Scalar>::parse_text("1/4"), Some(0.25));
    }
}
