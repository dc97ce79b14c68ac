//! Exact rational arithmetic helpers.
//!
//! Every probability and utility in the crate is a [`Rational`]. Agent
//! indifference has to be detected exactly, and some generated instances
//! carry utilities like `n^(4n)`, so floating point is only used for
//! display.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^k` for any integer `k`.
pub fn pow2(k: i64) -> Rational {
    let mag = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// `floor(log2 q)` for `q > 0`.
pub fn floor_log2(q: &Rational) -> i64 {
    assert!(q.is_positive(), "floor_log2 of non-positive value");
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    // q lies in (2^(e-1), 2^(e+1)) for e = nb - db.
    let e = nb - db;
    if *q >= pow2(e) {
        e
    } else {
        e - 1
    }
}

/// `ceil(log2 q)` for `q > 0`.
pub fn ceil_log2(q: &Rational) -> i64 {
    let f = floor_log2(q);
    if *q == pow2(f) {
        f
    } else {
        f + 1
    }
}

/// Compares `x` against `sqrt(radicand)` without leaving the rationals.
pub fn cmp_sqrt(x: &Rational, radicand: &Rational) -> Ordering {
    assert!(!radicand.is_negative(), "square root of a negative value");
    if x.is_negative() {
        return Ordering::Less;
    }
    (x * x).cmp(radicand)
}

fn isqrt_floor(q: &Rational) -> BigInt {
    // floor(sqrt(q)) = isqrt(floor(q)) for q >= 0.
    let fl = q.numer().div_floor(q.denom());
    match fl.sign() {
        Sign::Minus => panic!("square root of a negative value"),
        _ => BigInt::from_biguint(Sign::Plus, fl.magnitude().sqrt()),
    }
}

/// Exact square root when `q` is the square of a rational.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().magnitude().sqrt();
    let d = q.denom().magnitude().sqrt();
    let (n, d): (BigUint, BigUint) = (n, d);
    let r = Rational::new(BigInt::from(n), BigInt::from(d));
    if &(&r * &r) == q {
        Some(r)
    } else {
        None
    }
}

/// `floor(sqrt(q) * 10^digits) / 10^digits`; never exceeds `sqrt(q)`.
pub fn sqrt_floor_decimal(q: &Rational, digits: u32) -> Rational {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = q * Rational::from_integer(&scale * &scale);
    Rational::new(isqrt_floor(&scaled), scale)
}

/// Smallest `10^-digits` multiple that is `>= sqrt(q)`, or the exact root.
pub fn sqrt_ceil_decimal(q: &Rational, digits: u32) -> Rational {
    if let Some(r) = exact_sqrt(q) {
        return r;
    }
    let lo = sqrt_floor_decimal(q, digits);
    let step = Rational::new(BigInt::one(), BigInt::from(10u32).pow(digits));
    let mut hi = lo + &step;
    while cmp_sqrt(&hi, q) == Ordering::Less {
        hi += &step;
    }
    hi
}

/// Canonical text form: `"3"` for integers, `"3/4"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct RationalParseError(pub String);

/// Parses `"7"`, `"-7"` or `"num/den"`. Decimal fractions are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let bad = || RationalParseError(s.to_string());
    let t = s.trim();
    let parse_int = |x: &str| -> Result<BigInt, RationalParseError> {
        let digits = x.strip_prefix('-').unwrap_or(x);
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        x.parse::<BigInt>().map_err(|_| bad())
    };
    match t.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(t)?)),
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Decimal rendering with `sig` significant digits, trailing zeros trimmed.
pub fn to_decimal(q: &Rational, sig: u32) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let neg = q.is_negative();
    let mag = q.abs();
    // Estimate the decimal exponent, then correct it exactly.
    let mut e10 = (floor_log2(&mag) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let ten = int(10);
    let pow10 = |k: i64| -> Rational {
        let p = pow(&ten, k.unsigned_abs() as u32);
        if k >= 0 {
            p
        } else {
            p.recip()
        }
    };
    while mag >= pow10(e10 + 1) {
        e10 += 1;
    }
    while mag < pow10(e10) {
        e10 -= 1;
    }
    // digits = round(mag * 10^(sig-1-e10))
    let shift = sig as i64 - 1 - e10;
    let scaled = &mag * pow10(shift);
    let mut digits = (scaled + frac(1, 2)).floor().to_integer();
    if digits >= BigInt::from(10u32).pow(sig) {
        digits /= 10;
        e10 += 1;
    }
    let shift = sig as i64 - 1 - e10;
    let ds = digits.to_string();
    let body = if (-6..15).contains(&e10) {
        if shift <= 0 {
            let mut s = ds.clone();
            s.push_str(&"0".repeat((-shift) as usize));
            s
        } else if (shift as usize) < ds.len() {
            let (ip, fp) = ds.split_at(ds.len() - shift as usize);
            trim_fraction(format!("{ip}.{fp}"))
        } else {
            let zeros = "0".repeat(shift as usize - ds.len());
            trim_fraction(format!("0.{zeros}{ds}"))
        }
    } else {
        let (h, t) = ds.split_at(1);
        let mant = if t.is_empty() {
            h.to_string()
        } else {
            trim_fraction(format!("{h}.{t}"))
        };
        format!("{mant}e{e10}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// `"17/4 (4.25)"`.
pub fn display_exact(q: &Rational) -> String {
    format!("{} ({})", format_rational(q), to_decimal(q, 12))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub mod serde_str {
    //! Serde adapter storing a [`Rational`] as its canonical string.
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs() {
        assert_eq!(floor_log2(&int(1)), 0);
        assert_eq!(floor_log2(&int(8)), 3);
        assert_eq!(floor_log2(&int(9)), 3);
        assert_eq!(floor_log2(&frac(1, 3)), -2);
        assert_eq!(floor_log2(&frac(1, 4)), -2);
        assert_eq!(floor_log2(&frac(8, 3)), 1);
        assert_eq!(ceil_log2(&int(8)), 3);
        assert_eq!(ceil_log2(&int(9)), 4);
        assert_eq!(ceil_log2(&int(1)), 0);
        assert_eq!(ceil_log2(&frac(1, 3)), -1);
    }

    #[test]
    fn square_roots() {
        assert_eq!(exact_sqrt(&frac(9, 4)), Some(frac(3, 2)));
        assert_eq!(exact_sqrt(&int(8)), None);
        assert_eq!(sqrt_floor_decimal(&int(4), 6), int(2));
        assert_eq!(sqrt_floor_decimal(&int(2), 6), frac(1_414_213, 1_000_000));
        assert_eq!(sqrt_ceil_decimal(&int(2), 6), frac(1_414_214, 1_000_000));
        assert_eq!(cmp_sqrt(&int(3), &int(8)), Ordering::Greater);
        assert_eq!(cmp_sqrt(&int(2), &int(4)), Ordering::Equal);
    }

    #[test]
    fn text_round_trip() {
        assert_eq!(parse_rational("3/4").unwrap(), frac(3, 4));
        assert_eq!(parse_rational("6/8").unwrap(), frac(3, 4));
        assert_eq!(parse_rational("12").unwrap(), int(12));
        assert!(parse_rational("0.75").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&frac(17, 4)), "17/4");
        assert_eq!(format_rational(&int(5)), "5");
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal(&frac(17, 4), 12), "4.25");
        assert_eq!(to_decimal(&int(5), 12), "5");
        assert_eq!(to_decimal(&frac(1, 3), 12), "0.333333333333");
        assert_eq!(to_decimal(&frac(2, 3), 12), "0.666666666667");
        assert_eq!(to_decimal(&frac(5, 6), 12), "0.833333333333");
        assert_eq!(to_decimal(&int(0), 12), "0");
        assert_eq!(to_decimal(&frac(-1, 8), 12), "-0.125");
        assert_eq!(to_decimal(&pow(&int(10), 20), 12), "1e20");
        assert_eq!(to_decimal(&frac(1, 1_000_000_000), 12), "1e-9");
        assert_eq!(display_exact(&frac(17, 4)), "17/4 (4.25)");
    }
}
