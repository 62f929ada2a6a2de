//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Everything that only needs field operations (cylinder masses, wedge
//! products, subspace elimination) is written against [`Scalar`], so the same
//! routine runs over `f64`, `f32` or exact [`Rational`] values. Code that needs
//! singular values or orthonormal frames is `f64`-only and lives on nalgebra.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::linalg::{self, Mat};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Field scalar used by the generic parts of the crate.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + Debug + PartialEq + PartialOrd + Send + Sync + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    /// Absolute value as `f64`; used for pivot selection only.
    fn magnitude(&self) -> f64;

    /// Whether the value should be treated as zero relative to `scale`.
    fn is_negligible(&self, scale: f64) -> bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Conversion from `f64`; exact for rationals (binary expansion).
    fn from_f64(x: f64) -> Self;

    /// Parses either a decimal literal or a `p/q` fraction.
    fn parse_scalar(s: &str) -> Option<Self>;

    /// JSON rendering: numbers for floats, `"p/q"` strings for rationals.
    fn to_json(&self) -> serde_json::Value;

    /// Basis of the right null space of `m`. The default is Gaussian
    /// elimination; `f64` overrides it with a singular-value threshold.
    fn kernel(m: &Mat<Self>) -> Vec<Vec<Self>> {
        linalg::kernel_by_elimination(m)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        parse_fraction_f64(s)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn kernel(m: &Mat<Self>) -> Vec<Vec<Self>> {
        linalg::kernel_by_svd(m, linalg::RANK_THRESHOLD)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn magnitude(&self) -> f64 {
        self.abs() as f64
    }

    fn is_negligible(&self, scale: f64) -> bool {
        (self.abs() as f64) <= 1e-5 * scale.max(f64::MIN_POSITIVE)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        parse_fraction_f64(s).map(|v| v as f32)
    }

    fn to_json(&self) -> serde_json::Value {
        (*self as f64).to_json()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&Signed::abs(self)).unwrap_or(f64::INFINITY)
    }

    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

fn parse_fraction_f64(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                None
            } else {
                Some(p / q)
            }
        }
        None => s.parse().ok(),
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal literal such as `"0.25"`
/// into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let mut num: BigInt = digits.parse().ok()?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        return Some(Rational::new(num, den));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// Renders a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a JSON scalar: a number, or a string holding a number or `p/q`.
pub fn scalar_from_json<T: Scalar>(v: &serde_json::Value) -> Option<T> {
    match v {
        serde_json::Value::Number(n) => {
            if T::EXACT {
                T::parse_scalar(&n.to_string())
            } else {
                n.as_f64().map(|x| T::parse_scalar(&format!("{x:e}")))?
            }
        }
        serde_json::Value::String(s) => T::parse_scalar(s),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/3"), Some(Rational::from_ratio(1, 3)));
        assert_eq!(parse_rational("-2/4"), Some(Rational::from_ratio(-1, 2)));
        assert_eq!(parse_rational("0.25"), Some(Rational::from_ratio(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(Rational::from_ratio(-3, 2)));
        assert_eq!(parse_rational("7"), Some(Rational::from_ratio(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&Rational::from_ratio(2, 6)), "1/3");
        assert_eq!(format_rational(&Rational::from_ratio(4, 2)), "2");
    }

    #[test]
    fn json_scalars() {
        let q: Rational = scalar_from_json(&serde_json::json!("3/4")).unwrap();
        assert_eq!(q, Rational::from_ratio(3, 4));
        let q: Rational = scalar_from_json(&serde_json::json!(0.5)).unwrap();
        assert_eq!(q, Rational::from_ratio(1, 2));
        let f: f64 = scalar_from_json(&serde_json::json!("1/4")).unwrap();
        assert_eq!(f, 0.25);
        let f: f64 = scalar_from_json(&serde_json::json!(0.1)).unwrap();
        assert_eq!(f, 0.1);
    }
}
