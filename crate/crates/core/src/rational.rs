//! Exact rational numbers.
//!
//! Every probability, slack and distance in this crate is a [`Rational`]. The
//! textual form is `num/den` (or just `num` when the denominator is one) and is
//! always printed in lowest terms, so `parse(x.to_string()) == x` bit for bit.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Arbitrary-precision fraction, always normalised (lowest terms, positive
/// denominator).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// True when `0 <= self <= 1`.
    pub fn is_unit_interval(&self) -> bool {
        !self.is_negative() && *self <= Rational::one()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Lossy display value.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with exactly `digits` fractional digits, rounded half
    /// away from zero. Display only; never parse this back.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = self.0.numer().abs() * &scale;
        let den = self.0.denom();
        let (q, r) = scaled.div_rem(den);
        let q = if r * 2 >= *den { q + 1 } else { q };
        let mut s = q.to_string();
        if digits > 0 {
            if s.len() <= digits {
                s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
            }
            s.insert(s.len() - digits, '.');
        }
        if self.is_negative() && s.chars().any(|c| c != '0' && c != '.') {
            s.insert(0, '-');
        }
        s
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, Error> {
    let t = s.trim();
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("invalid rational `{whole}`")));
    }
    t.parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("invalid rational `{whole}`")))
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `num/den`, `num`, and plain decimals such as `0.15` or `.5`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_int(n, s)?;
            let d = parse_int(d, s)?;
            return Rational::from_big(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let negative = int.trim_start().starts_with('-');
            let int_digits = int.trim().trim_start_matches(['-', '+']);
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse(format!("invalid rational `{s}`")));
            }
            let whole = if int_digits.is_empty() {
                BigInt::zero()
            } else {
                parse_int(int_digits, s)?
            };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac_val = parse_int(frac, s)?;
            let mut n = whole * &scale + frac_val;
            if negative {
                n = -n;
            }
            return Rational::from_big(n, scale);
        }
        Ok(Rational(BigRational::from_integer(parse_int(s, s)?)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(Rational::from_integer(i)),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        let mut acc = Rational::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// `r!(3, 8)` builds 3/8; `r!(2)` builds 2.
#[macro_export]
macro_rules! r {
    ($n:expr) => {
        $crate::Rational::from_integer($n)
    };
    ($n:expr, $d:expr) => {
        $crate::Rational::new($n, $d)
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalises_on_construction() {
        assert_eq!(Rational::new(4, 8), Rational::new(1, 2));
        assert_eq!(Rational::new(3, -6).to_string(), "-1/2");
        assert_eq!(Rational::new(6, 3).to_string(), "2");
    }

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!("4/8".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::from_integer(7));
        assert_eq!("0.15".parse::<Rational>().unwrap(), Rational::new(3, 20));
        assert_eq!(".5".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert_eq!("-1/8".parse::<Rational>().unwrap(), Rational::new(-1, 8));
        assert_eq!("-0.25".parse::<Rational>().unwrap(), Rational::new(-1, 4));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("a/2".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
        assert!("1.".parse::<Rational>().is_err());
    }

    #[test]
    fn decimal_display() {
        assert_eq!(Rational::new(1, 3).to_decimal(10), "0.3333333333");
        assert_eq!(Rational::new(2, 3).to_decimal(4), "0.6667");
        assert_eq!(Rational::new(-1, 8).to_decimal(3), "-0.125");
        assert_eq!(Rational::from_integer(1).to_decimal(2), "1.00");
        assert_eq!(Rational::zero().to_decimal(0), "0");
    }

    #[test]
    fn json_accepts_strings_and_integers() {
        let v: Vec<Rational> = serde_json::from_str(r#"["3/8", 1, "0"]"#).unwrap();
        assert_eq!(v, vec![Rational::new(3, 8), Rational::one(), Rational::zero()]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["3/8","1","0"]"#);
    }

    proptest! {
        #[test]
        fn text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let x = Rational::new(n, d);
            let text = x.to_string();
            let back: Rational = text.parse().unwrap();
            prop_assert_eq!(&back, &x);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn field_identities(a in -500i64..500, b in 1i64..500, c in -500i64..500, d in 1i64..500) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            if !y.is_zero() {
                prop_assert_eq!(&(&x * &y) / &y, x.clone());
            }
        }
    }
}
