//! Exact rational helpers shared by the measure code.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{Number, Value};

use crate::error::{BlochError, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^-n` exactly.
pub fn pow2_inv(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n as usize)
}

/// `2^n` exactly.
pub fn pow2(n: u32) -> Rational {
    Rational::from_integer(BigInt::one() << n as usize)
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else if q.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    })
}

/// Natural logarithm of `|q|`, accurate even when `q` under- or overflows `f64`.
pub fn ln_abs(q: &Rational) -> f64 {
    fn ln_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits <= 1000 {
            return n.to_f64().map_or(f64::NAN, |x| x.abs().ln());
        }
        let shift = bits - 64;
        let top: BigInt = n.abs() >> shift as usize;
        top.to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * std::f64::consts::LN_2
    }
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_int(q.numer()) - ln_int(q.denom())
}

/// Parses `"3"`, `"-1/2"` or a finite decimal such as `"0.375"` into an exact rational.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| BlochError::Parse(format!("bad numerator in {s:?}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| BlochError::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(BlochError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| BlochError::Parse(format!("bad decimal {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| BlochError::Parse(format!("bad rational {s:?}")))
}

/// JSON `[num, den]` pair with arbitrary-size integers.
pub fn to_json_pair(q: &Rational) -> Value {
    let n = Number::from_str(&q.numer().to_string()).expect("integer literal");
    let d = Number::from_str(&q.denom().to_string()).expect("integer literal");
    Value::Array(vec![Value::Number(n), Value::Number(d)])
}

pub fn from_json_pair(v: &Value) -> Result<Rational> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| BlochError::Parse(format!("expected [num, den], got {v}")))?;
    let part = |x: &Value| -> Result<BigInt> {
        match x {
            Value::Number(n) => BigInt::from_str(&n.to_string())
                .map_err(|_| BlochError::Parse(format!("non-integer rational part {n}"))),
            Value::String(s) => BigInt::from_str(s).map_err(|_| BlochError::Parse(format!("bad integer {s:?}"))),
            other => Err(BlochError::Parse(format!("bad rational part {other}"))),
        }
    };
    let (n, d) = (part(&arr[0])?, part(&arr[1])?);
    if d.is_zero() {
        return Err(BlochError::Parse("zero denominator".into()));
    }
    Ok(Rational::new(n, d))
}

/// A JSON number printed with 17 significant digits; non-finite values become strings.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("finite float literal"))
    } else {
        Value::String(format!("{x}"))
    }
}

/// CSV/text formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(parse("0.375").unwrap(), ratio(3, 8));
        assert_eq!(parse("7").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn ln_of_tiny_rationals() {
        let q = pow2_inv(5000) * ratio(3, 1);
        let expected = 3f64.ln() - 5000.0 * std::f64::consts::LN_2;
        assert!((ln_abs(&q) - expected).abs() < 1e-10);
        assert!((ln_abs(&ratio(1, 4)) + 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn json_pair_round_trips_large_values() {
        let q = pow2_inv(200) * ratio(3, 7);
        assert_eq!(from_json_pair(&to_json_pair(&q)).unwrap(), q);
    }

    #[test]
    fn float_formatting_is_fixed_width() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(json_f64(2.0).to_string(), "2.0000000000000000e+0");
    }
}
