use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction in lowest terms with positive denominator.
///
/// Serializes as the string `"p/q"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Exact value of a finite float.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    /// Smallest-denominator rational within `tol` of `x`.
    pub fn approximate(x: f64, tol: f64) -> Result<Self> {
        if !x.is_finite() || !tol.is_finite() || tol < 0.0 {
            return Err(Error::InvalidInput(format!("cannot rationalize {x} at tolerance {tol}")));
        }
        let center = BigRational::from_float(x).unwrap();
        let radius = BigRational::from_float(tol).unwrap();
        Ok(simplest_in(&(&center - &radius), true, &(&center + &radius), true))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Rational(self.0.ceil())
    }
}

/// Smallest-denominator rational in the interval between `lo` and `hi`,
/// found by descending the Stern–Brocot tree (continued fractions).
/// Endpoint flags select closed (`true`) or open (`false`) ends; the
/// interval must be nonempty.
pub fn simplest_in(lo: &BigRational, lo_closed: bool, hi: &BigRational, hi_closed: bool) -> Rational {
    if lo.is_negative() {
        if hi.is_positive() || (hi.is_zero() && hi_closed) {
            return Rational::zero();
        }
        // Mirror into the positive half-line.
        let r = simplest_in(&-hi, hi_closed, &-lo, lo_closed);
        return Rational(-r.0);
    }
    Rational(simplest_positive(lo, lo_closed, Some(hi), hi_closed))
}

fn simplest_positive(lo: &BigRational, lo_closed: bool, hi: Option<&BigRational>, hi_closed: bool) -> BigRational {
    let fl = lo.floor();
    let first_int = if lo.is_integer() && lo_closed { lo.clone() } else { &fl + BigRational::one() };
    let fits = match hi {
        None => true,
        Some(h) => match first_int.cmp(h) {
            Ordering::Less => true,
            Ordering::Equal => hi_closed,
            Ordering::Greater => false,
        },
    };
    if fits {
        return first_int;
    }
    // No integer inside: lo and hi share the integer part `fl`, and
    // x -> 1/(x - fl) maps the interval to one that is reversed in order.
    let hi = hi.expect("bounded interval");
    let frac_lo = lo - &fl;
    let frac_hi = hi - &fl;
    let new_lo = frac_hi.recip();
    let new_hi = if frac_lo.is_zero() { None } else { Some(frac_lo.recip()) };
    let inner = simplest_positive(&new_lo, hi_closed, new_hi.as_ref(), lo_closed);
    fl + inner.recip()
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let p = BigInt::from_str(p).map_err(|_| bad())?;
        let q = BigInt::from_str(q).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(p, q)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$m(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    use num_integer::Integer;
    values.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}
