//! Exact rational arithmetic for every time, rate and volume in the crate.
//!
//! All scheduling invariants checked here are exact inequalities, so the
//! computation path never touches floating point. `Rat` wraps an
//! arbitrary-precision `BigRational` kept in lowest terms with a positive
//! denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Exact rational number. Construction always reduces to lowest terms and
/// normalizes the denominator to be positive; arithmetic never rounds.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid rational literal `{0}`")]
    Parse(String),
}

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// `num/den` from machine integers. Panics on a zero denominator; use
    /// [`Rat::from_bigints`] for untrusted input.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(value: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self, RatError> {
        if den.is_zero() {
            return Err(RatError::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Exact value as `u64` if the rational is a nonnegative integer that fits.
    pub fn to_u64(&self) -> Option<u64> {
        if !self.is_integer() {
            return None;
        }
        self.0.numer().to_u64()
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    /// `⌈1/self⌉` for a positive rational, as a prefix length.
    pub fn ceil_recip(&self) -> usize {
        assert!(self.is_positive(), "ceil_recip needs a positive value");
        self.0
            .denom()
            .div_ceil(self.0.numer())
            .to_usize()
            .expect("ceil_recip out of usize range")
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rat({})", self)
    }
}

impl FromStr for Rat {
    type Err = RatError;

    /// Parses `"7"`, `"-3"`, or `"7/6"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || RatError::Parse(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let num = BigInt::from_str(n.trim()).map_err(|_| bad())?;
                let den = BigInt::from_str(d.trim()).map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(RatError::ZeroDenominator);
                }
                Ok(Rat(BigRational::new(num, den)))
            }
            None => {
                let num = BigInt::from_str(s).map_err(|_| bad())?;
                Ok(Rat(BigRational::from_integer(num)))
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), Add::add)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), Add::add)
    }
}

impl From<i64> for Rat {
    fn from(value: i64) -> Self {
        Rat::int(value)
    }
}

impl From<u32> for Rat {
    fn from(value: u32) -> Self {
        Rat::int(i64::from(value))
    }
}

/// Wire form: `{"num": N, "den": D}` with arbitrary-precision JSON integers,
/// always in lowest terms with a positive denominator.
#[derive(Serialize, Deserialize)]
struct RatRepr {
    num: serde_json::Number,
    den: serde_json::Number,
}

fn bigint_to_number(value: &BigInt) -> serde_json::Number {
    serde_json::from_str(&value.to_string()).expect("integer literal is a valid JSON number")
}

fn number_to_bigint(value: &serde_json::Number) -> Result<BigInt, String> {
    BigInt::from_str(&value.to_string())
        .map_err(|_| format!("expected an integer, got `{value}`"))
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RatRepr {
            num: bigint_to_number(self.0.numer()),
            den: bigint_to_number(self.0.denom()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = RatRepr::deserialize(deserializer)?;
        let num = number_to_bigint(&repr.num).map_err(D::Error::custom)?;
        let den = number_to_bigint(&repr.den).map_err(D::Error::custom)?;
        Rat::from_bigints(num, den).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(r(1, 3) + r(1, 6), r(1, 2));
        assert_eq!(r(7, 6) - r(1, 6), Rat::one());
        assert_eq!(r(2, 3) * r(3, 4), r(1, 2));
        assert_eq!(r(1, 2) / r(1, 6), Rat::int(3));
        assert_eq!(-r(1, 2), r(-1, 2));
    }

    #[test]
    fn normalizes_sign_and_reduces() {
        assert_eq!(r(2, -4), r(-1, 2));
        assert_eq!(r(6, 4).to_string(), "3/2");
        assert_eq!(r(-8, 2).to_string(), "-4");
    }

    #[test]
    fn ceil_recip_table() {
        for (eps, expect) in [
            (r(1, 4), 4),
            (r(1, 3), 3),
            (r(1, 2), 2),
            (r(2, 3), 2),
            (r(3, 4), 2),
            (r(2, 5), 3),
            (Rat::one(), 1),
        ] {
            assert_eq!(eps.ceil_recip(), expect, "⌈1/{eps}⌉");
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("7/6".parse::<Rat>().unwrap(), r(7, 6));
        assert_eq!("-3".parse::<Rat>().unwrap(), Rat::int(-3));
        assert_eq!(" 9 / 12 ".parse::<Rat>().unwrap(), r(3, 4));
        assert!(matches!(
            "1/0".parse::<Rat>(),
            Err(RatError::ZeroDenominator)
        ));
        assert!("1.5".parse::<Rat>().is_err());
    }

    #[test]
    fn serde_is_num_den_pairs() {
        let json = serde_json::to_string(&r(7, 6)).unwrap();
        assert_eq!(json, r#"{"num":7,"den":6}"#);
        let back: Rat = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r(7, 6));
        // Non-integer parts are rejected.
        assert!(serde_json::from_str::<Rat>(r#"{"num":1.5,"den":2}"#).is_err());
        assert!(serde_json::from_str::<Rat>(r#"{"num":1,"den":0}"#).is_err());
    }

    #[test]
    fn serde_survives_big_values() {
        let big = Rat::from_bigints(
            BigInt::from_str("123456789012345678901234567890123").unwrap(),
            BigInt::from_str("7").unwrap(),
        )
        .unwrap();
        let json = serde_json::to_string(&big).unwrap();
        let back: Rat = serde_json::from_str(&json).unwrap();
        assert_eq!(back, big);
    }

    proptest! {
        #[test]
        fn add_sub_round_trip(a in -1000i64..1000, b in 1i64..60, c in -1000i64..1000, d in 1i64..60) {
            let x = Rat::new(a, b);
            let y = Rat::new(c, d);
            prop_assert_eq!((&x + &y) - &y, x);
        }

        #[test]
        fn display_parse_round_trip(a in -10_000i64..10_000, b in 1i64..500) {
            let x = Rat::new(a, b);
            prop_assert_eq!(x.to_string().parse::<Rat>().unwrap(), x);
        }
    }
}
